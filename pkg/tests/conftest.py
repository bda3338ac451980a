import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stochmatch.corpus import load_corpus  # noqa: E402
from stochmatch.instance import make_instance, online_instance  # noqa: E402


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture(scope="session")
def corpus_by_name(corpus):
    return {inst.name: inst for inst in corpus}


@pytest.fixture
def single_edge():
    return make_instance("offline-bipartite", ["u", "v"], [("u", "v", 0.5, 1.0)], 1, (["u"], ["v"]))


@pytest.fixture
def star():
    return make_instance("offline-bipartite", ["v", "a", "b"], [("v", "a", 0.5, 1.0), ("v", "b", 0.5, 1.0)],
                         {"v": 2, "a": 1, "b": 1}, (["v"], ["a", "b"]))


@pytest.fixture
def path_uvw():
    return make_instance("offline-bipartite", ["u", "v", "w"], [("u", "v", 1.0, 1.0), ("v", "w", 1.0, 2.0)],
                         1, (["v"], ["u", "w"]))


@pytest.fixture
def triangle():
    return make_instance("offline-general", ["u", "v", "w"],
                         [("u", "v", 1.0, 1.0), ("v", "w", 1.0, 1.0), ("w", "u", 1.0, 1.0)], 1)


@pytest.fixture
def cycle5():
    vs = list("abcde")
    return make_instance("offline-general", vs, [(a, b, 1.0, 1.0) for a, b in zip(vs, vs[1:] + vs[:1])], 1)


@pytest.fixture
def online_1x1():
    return online_instance([[0.5]], [[1.0]], 1, rounds=1)
