import numpy as np
import pytest

from fdrbounds.nulls import EXACT_NORMAL, PAPER, NullModel, null_model

# reference values computed with 30-digit arithmetic, frozen
TAIL_AT_2 = 0.045500263896358414
TAIL_AT_187 = 0.06148381785893192
HALF_SIGMA_MASS = 0.38292492254802621
SIGNED_MASS_162_158 = 0.89033042830799372


def test_exact_tail_values():
    assert EXACT_NORMAL.tail(2.0) == pytest.approx(TAIL_AT_2, rel=1e-14)
    assert EXACT_NORMAL.tail(1.87) == pytest.approx(TAIL_AT_187, rel=1e-14)
    assert EXACT_NORMAL.tail(0.0) == pytest.approx(1.0, rel=1e-14)


def test_exact_bin_mass():
    assert EXACT_NORMAL.bin_mass(0.0, 0.5) == pytest.approx(HALF_SIGMA_MASS, rel=1e-14)
    # complementary pieces add up to the tail complement
    total = EXACT_NORMAL.bin_mass(0.0, 1.0) + EXACT_NORMAL.bin_mass(1.0, 2.0)
    assert total == pytest.approx(1.0 - TAIL_AT_2, rel=1e-12)


def test_paper_mode_overrides_only_the_two_pinned_points():
    assert PAPER.tail(2.0) == 0.05
    assert PAPER.bin_mass(0.0, 0.5) == 0.383
    assert PAPER.tail(2.1) == EXACT_NORMAL.tail(2.1)
    assert PAPER.bin_mass(0.0, 0.4) == EXACT_NORMAL.bin_mass(0.0, 0.4)
    assert PAPER.bin_mass(0.5, 1.0) == EXACT_NORMAL.bin_mass(0.5, 1.0)


def test_modes_agree_within_half_a_percentage_point():
    assert abs(PAPER.tail(2.0) - EXACT_NORMAL.tail(2.0)) < 0.005
    assert abs(PAPER.bin_mass(0.0, 0.5) - EXACT_NORMAL.bin_mass(0.0, 0.5)) < 0.005


def test_signed_interval_mass_asymmetric():
    assert EXACT_NORMAL.signed_interval_mass(-1.62, 1.58) == pytest.approx(
        SIGNED_MASS_162_158, rel=1e-14
    )
    # mode-independent by construction
    assert PAPER.signed_interval_mass(-1.62, 1.58) == EXACT_NORMAL.signed_interval_mass(
        -1.62, 1.58
    )


def test_tail_vectorized_matches_scalars():
    h = np.array([0.0, 1.0, 2.0, 3.5])
    vec = PAPER.tail(h)
    assert vec.shape == (4,)
    for hi, vi in zip(h, vec):
        assert vi == PAPER.tail(float(hi))


def test_validation():
    with pytest.raises(ValueError):
        NullModel("approximate")
    with pytest.raises(ValueError):
        EXACT_NORMAL.tail(-0.5)
    with pytest.raises(ValueError):
        EXACT_NORMAL.bin_mass(0.5, 0.2)
    with pytest.raises(ValueError):
        EXACT_NORMAL.signed_interval_mass(1.0, 1.0)
    assert null_model("paper").kind == "paper"
