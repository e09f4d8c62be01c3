from dataclasses import dataclass


class MetricError(ValueError):
    pass


class EmptyCorpus(MetricError):
    pass


@dataclass(frozen=True)
class EvalPair:
    """One hypothesis/reference segment pair (single cased reference)."""
    hypothesis: str
    reference: str

    def __post_init__(self):
        if not self.reference.strip():
            raise MetricError("reference segment is empty")


def check_pairs(pairs):
    pairs = list(pairs)
    if not pairs:
        raise EmptyCorpus("no segment pairs to score")
    return pairs
