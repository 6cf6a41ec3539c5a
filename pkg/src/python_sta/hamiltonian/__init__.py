from .hamiltonian import TimeDependentHamiltonian, FunctionHamiltonian, is_hermitian, commutator
from .stirap import StirapParams, StirapHamiltonian, MixingAngles, Eigensystem
from .rescaled import RescaledHamiltonian, tr_hamiltonian, tr_pulses_closed_form, commutator_check
from .counterdiabatic import CounterdiabaticHamiltonian, cd_hamiltonian
from .pi_pulse import PiPulseHamiltonian, rabi_transfer_probability
from .perturbed import ScaledHamiltonian, DetunedHamiltonian
