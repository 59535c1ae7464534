import pytest

from headbalance.profiles import ModelProfile


@pytest.fixture
def profile_4112() -> ModelProfile:
    """The single-layer worked example used throughout the suite."""
    return ModelProfile(
        model_name="example",
        kv_budget=2,
        num_layers=1,
        heads_per_layer=4,
        weights=((4.0, 1.0, 1.0, 2.0),),
    )


def make_profile(rows) -> ModelProfile:
    rows = tuple(tuple(float(w) for w in row) for row in rows)
    return ModelProfile(
        model_name="test",
        kv_budget=0,
        num_layers=len(rows),
        heads_per_layer=len(rows[0]),
        weights=rows,
    )
