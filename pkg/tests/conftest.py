import random

import pytest

from hscn.pairs import CnType, HsCnPair, PairSource

WORDS = [
    "hate", "speech", "never", "helps", "anyone", "please", "refrain", "from",
    "using", "slurs", "people", "deserve", "respect", "every", "faith", "and",
    "group", "has", "value", "evidence", "source", "link", "claim", "true",
    "world", "better", "place", "without", "violence", "words", "hurt",
]


def random_text(rng: random.Random, min_words: int = 3, max_words: int = 12) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(min_words, max_words)))


def make_pair(
    rng: random.Random | None = None,
    hs: str | None = None,
    cn: str | None = None,
    source: PairSource = PairSource.generated,
    cn_type: CnType | None = None,
    pair_id: str | None = None,
) -> HsCnPair:
    rng = rng or random.Random(0)
    kwargs = {}
    if pair_id is not None:
        kwargs["id"] = pair_id
    return HsCnPair(
        hate_speech=hs if hs is not None else random_text(rng),
        counter_narrative=cn if cn is not None else random_text(rng),
        source=source,
        cn_type=cn_type,
        **kwargs,
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(12345)
