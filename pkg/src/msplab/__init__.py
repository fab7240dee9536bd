"""Monte Carlo and analytic toolkit for the matroid secretary problem under
Poisson arrivals: instances, improving-element algorithms, word languages,
closed-form bounds and a seeded simulation harness."""
from ._jit import BACKEND
from .algorithms import ALGORITHMS, RunConfig, run
from .analytics import a_laminar, c_uniform, optimize_mixture, optimize_scalar
from .arrivals import augment, improving_trace, sample_arrivals
from .generators import GeneratorSpec, tight_laminar
from .harness import CompetitivenessReport, distribution_tests, estimate, exact_oracle
from .labeling import Language, LabelScheme, in_language, improving_word, verify_implication
from .matroids import MatroidInstance, validate_instance

__version__ = "0.1.0"
