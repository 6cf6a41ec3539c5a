from .errors import StaError, DomainError, DegeneratePointError, ConfigError, OutputError
from .rescale import RescaleParams, f, f_dot, f_inv, validate_properties
from .hamiltonian import StirapParams, TimeDependentHamiltonian, tr_hamiltonian
