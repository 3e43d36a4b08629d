"""Compile Bayesian network classifiers into OR-decomposable NNF class
formulas and explain their decisions."""

from .errors import (
    BncxError,
    CapExceeded,
    CircuitFormatError,
    DegenerateInstanceError,
    NumericalError,
    StructuralError,
    UsageError,
)
from .network import BayesNet, ClassifierSpec, classify, joint_query
from .bif import parse_bif, read_bif, serialize_bif
from .jointree import Jointree, build_jointree, calibrate, compile_jointree
from .ftree import FTree, compilation_width, extract_ftree, orient
from .nnf import NnfStore, enumerate_models, equivalent, read_circuit, write_circuit
from .compiler import Compilation, compile_class_formula, compile_complement
from .explain import (
    complete_reason,
    contrastive,
    general_reason,
    gnr,
    gsr,
    necessary_reasons,
    prime_implicants,
    prime_implicates,
    sufficient_reasons,
)

__version__ = "0.1.0"
