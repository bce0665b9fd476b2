"""Phone-level ASR transcript scoring and phonetic inventory discovery."""

from .align import Alignment, EditOp, ErrorReport, align, error_rate, per, pter
from .cluster import Dendrogram, agglomerative_cluster, flat_clusters, project_2d
from .confusion import (
    ConfusionMatrix,
    DistanceMatrix,
    RowStochasticMatrix,
    accumulate_confusions,
    distance_matrix,
    jsd,
    prune,
    row_normalize,
)
from .discovery import (
    DiscoveryScore,
    FrequencyProfile,
    Inventory,
    aggregate,
    discover,
    feature_breakdown,
    frequency_profile,
    min_threshold,
    pearson_correlation,
    per_symbol_breakdown,
    score,
    sweep,
)
from .ipa import (
    FeatureTable,
    Phone,
    PhoneToken,
    Transcript,
    classify_symbol,
    load_feature_table,
    parse_transcript,
    phones_to_tokens,
    tokenize_phone,
)
from .simulate import ChannelModel, SimulationLog, simulate

__version__ = "0.1.0"
