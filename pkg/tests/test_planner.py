"""Offline planning: cache contents, determinism, persistence integrity,
and the one-ghost identity between subtask and undecomposed full game."""

import numpy as np
import pytest

from capir.dynamics import (
    ASSISTANT_ACTIONS,
    DEAD,
    HUMAN_ACTIONS,
    SubtaskState,
    WorldState,
    protagonist_move,
)
from capir.dynamics import _ghost_move_distribution
from capir.level import load_level, parse_level
from capir.mdp import Mdp, compute_q, value_iteration
from capir.planner import (
    CacheChecksumError,
    CacheLevelMismatchError,
    CacheVersionError,
    cache_from_bytes,
    cache_to_bytes,
    default_cache_path,
    load_cache,
    plan_level,
    project_state,
    save_cache,
)

HDR = "capir-level v1\ngamma=0.95 flee_radius=4 flee_prob=0.9 shoot_range=3 max_steps=300 switch_stay=0.8\n"


class TestPlanLevel:
    def test_corridor_single_subtask(self, corridor3_level):
        cache = plan_level(corridor3_level)
        assert cache.num_subtasks == 1
        assert cache.qtables[0].shape == (36, 30)
        assert cache.converged

    def test_planning_is_deterministic_bit_identical(self, corridor3_level):
        a = cache_to_bytes(plan_level(corridor3_level))
        b = cache_to_bytes(plan_level(corridor3_level))
        assert a == b

    def test_three_ghosts_three_subtasks(self, fixture_level, fixture_cache):
        m = fixture_level.grid.num_cells
        assert fixture_cache.num_subtasks == 3
        for q in fixture_cache.qtables:
            assert q.shape == (m * m * (m + 1), 30)

    def test_nonconverged_cache_is_marked(self, corridor3_level):
        cache = plan_level(corridor3_level, epsilon=1e-12, max_iterations=2)
        assert not cache.converged
        blob = cache_to_bytes(cache)
        assert not cache_from_bytes(blob).converged


class TestProjectState:
    def test_projection_alive(self):
        world = WorldState(3, 5, ((7, True), (2, True)))
        assert project_state(world, 0) == SubtaskState(3, 5, 7)
        assert project_state(world, 1) == SubtaskState(3, 5, 2)

    def test_projection_dead(self):
        world = WorldState(3, 5, ((7, False), (2, True)))
        assert project_state(world, 0) == SubtaskState(3, 5, DEAD)

    def test_projections_differ_only_in_ghost(self):
        world = WorldState(1, 4, ((0, True), (6, True), (2, False)))
        states = [project_state(world, i) for i in range(3)]
        assert len({(s.human_pos, s.assistant_pos) for s in states}) == 1
        assert [s.ghost for s in states] == [0, 6, DEAD]


class TestCachePersistence:
    def test_round_trip_bit_exact(self, tmp_path, corridor3_level):
        cache = plan_level(corridor3_level)
        path = tmp_path / "c.qcache"
        save_cache(cache, path)
        back = load_cache(path, corridor3_level)
        assert np.array_equal(back.qtables[0], cache.qtables[0])
        assert back.level_hash == cache.level_hash
        assert back.params == cache.params
        assert back.reports[0].iterations == cache.reports[0].iterations

    def test_edited_level_is_mismatch_error(self, tmp_path, corridor3_level):
        cache = plan_level(corridor3_level)
        path = tmp_path / "c.qcache"
        save_cache(cache, path)
        edited = parse_level(corridor3_level.source_text.replace("#HDG#", "#HGD#"), "edited")
        with pytest.raises(CacheLevelMismatchError):
            load_cache(path, edited)

    def test_truncated_file_is_checksum_error(self, tmp_path, corridor3_level):
        blob = cache_to_bytes(plan_level(corridor3_level))
        path = tmp_path / "c.qcache"
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(CacheChecksumError):
            load_cache(path)

    def test_corrupt_byte_is_checksum_error(self, corridor3_level):
        blob = bytearray(cache_to_bytes(plan_level(corridor3_level)))
        blob[len(blob) // 2] ^= 0x01
        with pytest.raises(CacheChecksumError):
            cache_from_bytes(bytes(blob))

    def test_bad_magic_is_version_error(self, corridor3_level):
        blob = cache_to_bytes(plan_level(corridor3_level))
        with pytest.raises(CacheVersionError):
            cache_from_bytes(b"NOTACPC" + blob[7:])

    def test_unsupported_version_is_version_error(self, corridor3_level):
        import hashlib
        import struct

        blob = cache_to_bytes(plan_level(corridor3_level))
        body = bytearray(blob[:-32])
        struct.pack_into("<H", body, 7, 99)
        body = bytes(body)
        with pytest.raises(CacheVersionError):
            cache_from_bytes(body + hashlib.sha256(body).digest())

    def test_default_cache_path(self):
        assert default_cache_path("x/level1.lvl").name == "level1.qcache"


def enumerate_full_game_one_ghost(level):
    """Full-game transition enumeration for a single-ghost level, built from
    the whole-world step semantics (kill-nearest targeting) rather than the
    subtask projection. With one ghost the two models must coincide."""
    grid, params = level.grid, level.params
    m = grid.num_cells
    num_states = m * m * (m + 1)

    def encode(h, d, g):
        return (h * m + d) * (m + 1) + (m if g == DEAD else g)

    transitions = []
    for h in range(m):
        for d in range(m):
            for gcode in range(m + 1):
                g = DEAD if gcode == m else gcode
                row = []
                for ha in HUMAN_ACTIONS:
                    for da in ASSISTANT_ACTIONS:
                        if g == DEAD:
                            row.append([(encode(h, d, DEAD), 1.0, 0.0)])
                            continue
                        hp = protagonist_move(grid, h, ha)
                        dp = protagonist_move(grid, d, da)
                        # nearest live ghost within range is the only ghost
                        if ha == "SHOOT" and grid.dist(hp, g) <= params.shoot_range:
                            row.append([(encode(hp, dp, DEAD), 1.0, 1.0)])
                            continue
                        cells, probs = _ghost_move_distribution(
                            grid, g, hp, dp, params.flee_radius, params.flee_prob
                        )
                        row.append([(encode(hp, dp, c), p, 0.0) for c, p in zip(cells, probs)])
                transitions.append(row)
    assert len(transitions) == num_states
    return transitions


class TestDecompositionIdentity:
    def test_one_ghost_subtask_equals_full_game(self, corridor3_level):
        cache = plan_level(corridor3_level)
        triples = enumerate_full_game_one_ghost(corridor3_level)
        full = Mdp.from_triples(triples, corridor3_level.params.gamma)
        v, report = value_iteration(full, epsilon=1e-9)
        assert report.converged
        q_full = compute_q(full, v)
        q_sub = plan_level(corridor3_level, epsilon=1e-9).qtables[0]
        assert np.abs(q_full - q_sub).max() <= 1e-8
        assert cache.codecs[0].num_states == full.num_states
