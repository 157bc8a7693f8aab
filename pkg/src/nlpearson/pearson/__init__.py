from .continuous import ContinuousSpectrumData
from .families import (
    CoxIngersollRoss,
    FisherSnedecor,
    JacobiDiffusion,
    OrnsteinUhlenbeck,
    PearsonFamily,
    ReciprocalGamma,
    StudentDiffusion,
    from_descriptor,
    from_json,
    make_family,
)
from .polynomials import PolynomialSystem, raw_rodrigues

__all__ = [
    "ContinuousSpectrumData",
    "CoxIngersollRoss",
    "FisherSnedecor",
    "JacobiDiffusion",
    "OrnsteinUhlenbeck",
    "PearsonFamily",
    "PolynomialSystem",
    "ReciprocalGamma",
    "StudentDiffusion",
    "from_descriptor",
    "from_json",
    "make_family",
    "raw_rodrigues",
]
