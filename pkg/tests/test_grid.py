import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cv2xsim.grid import (
    GridConfig,
    check_grid,
    data_symbol_indices,
    extract_positions,
    map_subframe,
)


def test_default_config_dimensions():
    cfg = GridConfig()
    assert cfg.n_subcarriers == 576
    assert cfg.shape == (576, 14)
    assert cfg.dmrs_symbol_indices == (2, 5, 8, 11)
    assert cfg.n_data_symbols == 10


def test_data_symbol_indices_default():
    assert data_symbol_indices(GridConfig()) == [0, 1, 3, 4, 6, 7, 9, 10, 12, 13]


def test_data_symbol_indices_empty_and_full():
    assert data_symbol_indices(GridConfig(dmrs_symbol_indices=())) == list(range(14))
    assert data_symbol_indices(GridConfig(dmrs_symbol_indices=tuple(range(14)))) == []


def test_config_rejects_bad_dmrs_indices():
    with pytest.raises(ValueError):
        GridConfig(dmrs_symbol_indices=(5, 2))
    with pytest.raises(ValueError):
        GridConfig(dmrs_symbol_indices=(2, 2))
    with pytest.raises(ValueError):
        GridConfig(dmrs_symbol_indices=(2, 14))


def test_map_subframe_placement():
    cfg = GridConfig()
    data = np.ones(10 * 576, dtype=complex)
    dmrs = [np.full(576, 1j) for _ in range(4)]
    grid = map_subframe(data, dmrs, cfg)
    assert np.all(grid[:, 2] == 1j)
    assert np.all(grid[:, 0] == 1)


def test_map_subframe_zero_propagation():
    cfg = GridConfig()
    grid = map_subframe(np.zeros(5760), [np.zeros(576)] * 4, cfg)
    assert np.all(grid == 0)


def test_map_subframe_rejects_wrong_lengths():
    cfg = GridConfig()
    with pytest.raises(ValueError):
        map_subframe(np.zeros(5759), [np.zeros(576)] * 4, cfg)
    with pytest.raises(ValueError):
        map_subframe(np.zeros(5760), [np.zeros(575)] * 4, cfg)
    with pytest.raises(ValueError):
        map_subframe(np.zeros(5760), [np.zeros(576)] * 3, cfg)


def test_extract_positions_selection_semantics():
    cfg = GridConfig()
    grid = np.arange(576 * 14, dtype=complex).reshape(576, 14)
    out = extract_positions(grid, [0, 0])
    assert out.shape == (576, 2)
    assert np.array_equal(out[:, 0], out[:, 1])
    empty = extract_positions(grid, [])
    assert empty.shape == (576, 0)
    with pytest.raises(ValueError):
        extract_positions(grid, [14])
    with pytest.raises(ValueError):
        extract_positions(grid, [-1])
    assert check_grid(grid, cfg) is grid


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_map_extract_round_trip(seed):
    cfg = GridConfig()
    gen = np.random.default_rng(seed)
    data = gen.standard_normal(5760) + 1j * gen.standard_normal(5760)
    dmrs = [gen.standard_normal(576) + 1j * gen.standard_normal(576) for _ in range(4)]
    grid = map_subframe(data, dmrs, cfg)
    assert grid.shape == cfg.shape
    pilots = extract_positions(grid, cfg.dmrs_symbol_indices)
    for j in range(4):
        assert np.array_equal(pilots[:, j], dmrs[j])
    cols = data_symbol_indices(cfg)
    recovered = extract_positions(grid, cols).T.reshape(-1)
    assert np.array_equal(recovered, data)
