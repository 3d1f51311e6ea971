import pytest

import corpus


@pytest.fixture(scope="session")
def seq2():
    return corpus.seq2()


@pytest.fixture(scope="session")
def run2():
    return corpus.run2()


@pytest.fixture(scope="session")
def three_channel():
    return corpus.three_channel()


@pytest.fixture(scope="session")
def mas_system():
    return corpus.mas_system()


@pytest.fixture(scope="session")
def certified_morphisms():
    """Name -> certified AlphaMorphism for the whole corpus."""
    from agentmine.morphisms import check_alpha

    out = {}
    for name, builder in corpus.CERTIFIED_MORPHISMS:
        src, dst, mapping = builder()
        out[name] = check_alpha(src, dst, mapping)
    return out
