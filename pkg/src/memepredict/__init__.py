"""Early prediction of meme success from network dynamics and text."""
from .graph import Graph, GraphFormatError, from_edges, load_graph
from .kshell import KShellIndex, k_shell_decompose
from .community import CommunityPartition, detect_communities, modularity
from .trajectory import MemeLabel, MemeTrajectory, label
from .sim import CascadeSpec, NetworkSpec, SeedStrategy, generate_corpus, generate_network, simulate_cascade
from .textfeat import Lexicon, language_features, load_lexicon, score
from .features import FEATURE_NAMES, FeatureVector, extract, extract_corpus
from .sensors import SensorReport, avoidance_test, characterize, sensor_test
from .learn import Dataset, TrainedModel, cross_validate, feature_importance, predict, train_ensemble, train_nb

__version__ = "0.1.0"
