"""Value scorer service: training and HTTP serving of the relevance and
stance classifiers plus a description-embedding endpoint."""

__version__ = "0.1.0"

SCHWARTZ_VALUES = (
    "power",
    "achievement",
    "hedonism",
    "stimulation",
    "self-direction",
    "universalism",
    "benevolence",
    "tradition",
    "conformity",
    "security",
)

VALUE_INDEX = {v: i for i, v in enumerate(SCHWARTZ_VALUES)}
