"""Static weak-field metrics, local frames and the pointwise Dirac Hamiltonian."""

from .fieldfile import FieldDocument, field_from_dict, load_field, parse_field
from .frame import (
    DiracCoefficientTable,
    FrameData,
    assemble_dirac_hamiltonian,
    christoffel,
    compare_with_printed,
    frame_at,
    operator_coefficients,
    spin_connection,
    vierbein,
)
from .metric import (
    FAMILIES,
    POTENTIALS,
    X,
    AdmissibilityError,
    Exclusion,
    FieldError,
    MetricModel,
    ResidualReport,
    cap_probe_points,
    check_field_equations,
    check_gauge,
    enforce_weak_cap,
    laplacian,
    make_field,
    sample_points,
    zero_field,
)
