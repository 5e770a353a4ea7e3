"""Estimate sender and receiver community numbers in multi-layer directed networks."""
from mlnet.exceptions import (
    DataFormatError,
    DegenerateInputError,
    DimensionMismatchError,
    MLNetError,
    NumericalFailureError,
)
from mlnet.gof import StatisticEvaluator, test_statistic
from mlnet.io import load_multiplex_edgelist, read_multiplex_edgelist
from mlnet.model import (
    BlockTensor,
    CommunityLabels,
    GeneratorConfig,
    MultiLayerNetwork,
    simulate,
)
from mlnet.selection import (
    CandidatePair,
    SelectionConfig,
    candidate_sequence,
    index_of_pair,
    mldigof_estimate,
    mlrdigof_estimate,
)
from mlnet.spectral import dsog_cocluster

__version__ = "0.1.0"
