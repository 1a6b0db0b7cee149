from pathlib import Path

import pytest

from gpe.corpus import corpus_files, gen_corpus, launch_from_header
from gpe.ptx import parse

DATA = Path(__file__).parent / "data"
GEN_SEED = 2024
GEN_COUNT = 50


def load_corpus_kernels():
    """(file stem, kernel, launch) for every kernel in the shipped corpus."""
    out = []
    for path in corpus_files():
        text = path.read_text()
        launch = launch_from_header(text)
        for kernel in parse(text).kernels:
            out.append((path.stem, kernel, launch))
    return out


@pytest.fixture(scope="session")
def corpus_kernels():
    return load_corpus_kernels()


@pytest.fixture(scope="session")
def generated_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("gen")
    gen_corpus(GEN_SEED, GEN_COUNT, out)
    return out


@pytest.fixture
def error_ptx():
    return lambda name: (DATA / "errors" / name).read_text()
