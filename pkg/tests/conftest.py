import numpy as np
import pytest

from swbcodec.filterbank import design_pqmf_prototype, design_qmf_prototype
from swbcodec.pipeline import generate_codec_weights, save_codec_weights


@pytest.fixture(scope="session")
def qmf():
    return design_qmf_prototype()


@pytest.fixture(scope="session")
def pqmf():
    return design_pqmf_prototype(num_bands=4)


@pytest.fixture(scope="session")
def codec_weights():
    return generate_codec_weights(seed=0)


@pytest.fixture(scope="session")
def weights_dir(tmp_path_factory, codec_weights):
    path = tmp_path_factory.mktemp("weights")
    save_codec_weights(codec_weights, path)
    return path


def snr_db(reference: np.ndarray, error: np.ndarray) -> float:
    return 10.0 * np.log10(np.mean(reference ** 2) / np.mean(error ** 2))
