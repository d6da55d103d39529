import pytest

from crisislens.generator import GenConfig, gen_corpus
from crisislens.model import CrisisRecognizer

TINY_MODEL_KWARGS = dict(
    d_model=8,
    d_ph=4,
    encoder_layers=1,
    encoder_heads=2,
    conv_widths=(2, 3),
    conv_channels=4,
    hidden_size=8,
    gcn_dims=(4, 3),
    epochs=4,
    batch_size=8,
    seed=0,
)


@pytest.fixture(scope="session")
def tiny_corpus():
    return gen_corpus(
        GenConfig(
            n_users=6,
            n_samples=48,
            seed=5,
            explicit_rate=0.3,
            implicit_rate=0.2,
            sarcasm_rate=0.1,
            timespan_days=2.0,
        )
    )


@pytest.fixture(scope="session")
def tiny_trained(tiny_corpus):
    model = CrisisRecognizer(**TINY_MODEL_KWARGS)
    model.fit(tiny_corpus.samples, lexicon=tiny_corpus.lexicon, graph=tiny_corpus.graph)
    return model
