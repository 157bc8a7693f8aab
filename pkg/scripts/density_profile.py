#!/usr/bin/env python3
"""Classical vs non-local OU density profiles at a few times.

Writes density_profile.csv with columns t, x, classical, stable_half, gamma.
"""

import numpy as np

from nlpearson import SpectralExpansion, make_family
from nlpearson.bernstein import GammaBernstein, StableBernstein


def main():
    ou = make_family("ou", theta=1.0, mu=0.0, sigma=1.0)
    classical = SpectralExpansion(ou)
    stable = SpectralExpansion(ou, StableBernstein(0.5), tail_tol=1e-3)
    gamma = SpectralExpansion(ou, GammaBernstein(), tail_tol=1e-3)
    xs = np.linspace(-4.0, 4.0, 161)
    rows = []
    for t in (0.25, 1.0, 4.0):
        rows.append(
            np.column_stack(
                [
                    np.full_like(xs, t),
                    xs,
                    classical.transition_density(t, xs, 0.0),
                    stable.nonlocal_transition_density(t, xs, 0.0),
                    gamma.nonlocal_transition_density(t, xs, 0.0),
                ]
            )
        )
    data = np.vstack(rows)
    header = "t,x,classical,stable_half,gamma"
    np.savetxt("density_profile.csv", data, delimiter=",", header=header, comments="")
    print(f"wrote density_profile.csv ({data.shape[0]} rows)")


if __name__ == "__main__":
    main()
