import numpy as np
import pytest

from utils import maze_dataset

from src.data import GoalMode, load_dataset
from src.envs import (
    CollectorConfig, LineRun, LineRunState, MalformedLayout, MazeSpec, MazeState, MiniMaze, UnknownEnv,
    UnknownLayout, Unreachable, audit, collect_dataset, collect_trajectory, expert_return, layout_names, linerun_step,
    make_env, maze_reset, maze_step, plan_waypoints, shortest_path,
)
from src.numeric import RngStream


def corridor(**overrides):
    return MazeSpec.named("corridor-S", **overrides)


def in_free_cell(spec, position):
    return spec.layout[int(np.floor(position[1]))][int(np.floor(position[0]))] != "#"


def flood_distances(spec, source):
    """Step counts from ``source`` to every reachable open cell, ring by ring."""
    distance, ring, level = {source: 0}, {source}, 0
    while ring:
        level += 1
        ring = {
            (r + dr, c + dc)
            for r, c in ring
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))
            if spec.layout[r + dr][c + dc] != "#" and (r + dr, c + dc) not in distance
        }
        distance.update((cell, level) for cell in ring)
    return distance


def test_001():
    """Both shipped layouts load with their start and goal cells"""
    assert layout_names() == ["corridor-S", "junction-T"]
    spec = corridor()
    assert (spec.height, spec.width) == (7, 9)
    assert spec.start_cells() == [(1, 1)]
    assert spec.goal_cell() == (5, 7)
    assert np.allclose(spec.goal_position, [7.5, 5.5])
    assert spec.episode_cap == 400
    assert MazeSpec.named("junction-T").episode_cap == 200


def test_002():
    """An unknown layout name is a usage error"""
    with pytest.raises(UnknownLayout) as info:
        MazeSpec.named("spiral")
    assert info.value.exit_code == 2
    assert "corridor-S" in str(info.value)


def test_003():
    """Layouts must be walled rectangles over the four layout characters"""
    with pytest.raises(MalformedLayout):
        MazeSpec(("#####", "#.#", "#####"))
    with pytest.raises(MalformedLayout):
        MazeSpec(("###", "#x#", "###"))
    with pytest.raises(MalformedLayout):
        MazeSpec(("###", "#..", "###"))
    with pytest.raises(MalformedLayout):
        MazeSpec(("###", "###", "###"))


def test_004():
    """A point mass at rest with zero action stays put"""
    spec = corridor()
    state = MazeState(np.array([3.5, 1.5]))
    nxt, reward, done = maze_step(spec, state, [0.0, 0.0])
    assert np.array_equal(nxt.position, state.position)
    assert np.array_equal(nxt.velocity, [0.0, 0.0])
    assert (reward, done, nxt.t) == (0.0, False, 1)


def test_005():
    """Moves into a wall keep the coordinate and zero that axis's velocity"""
    spec = corridor()
    state = MazeState(np.array([1.5, 1.5]))
    for _ in range(20):
        state, _, _ = maze_step(spec, state, [-1.0, 0.0])
        assert state.position[0] >= 1.0
        assert state.position[1] == 1.5
    assert state.velocity[0] == 0.0
    assert 1.0 <= state.position[0] < 1.25


def test_006():
    """Speed is clipped per axis and actions are clipped to [-1, 1]"""
    spec = corridor()
    a = b = MazeState(np.array([1.5, 1.5]))
    for _ in range(4):
        a, _, _ = maze_step(spec, a, [1.0, 0.0])
        b, _, _ = maze_step(spec, b, [5.0, 0.0])
        assert np.abs(a.velocity).max() <= spec.v_max
    assert np.array_equal(a.position, b.position)
    assert a.velocity[0] == pytest.approx(2.0)


def test_007():
    """Reaching the goal radius pays 1 and ends the episode"""
    spec = corridor()
    nxt, reward, done = maze_step(spec, MazeState(np.array([7.2, 5.5])), [0.0, 0.0])
    assert reward == 1.0 and done


def test_008():
    """Episodes end at the step cap"""
    spec = corridor(episode_cap=3)
    state = MazeState(np.array([1.5, 1.5]), t=2)
    nxt, reward, done = maze_step(spec, state, [0.0, 0.0])
    assert nxt.t == 3 and done and reward == 0.0


def test_009():
    """Breadth-first paths follow the corridor and run cell to cell"""
    spec = corridor()
    path = shortest_path(spec, (1, 1), (5, 7))
    assert len(path) == 23
    assert path[0] == (1, 1) and path[-1] == (5, 7)
    assert all(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1 for a, b in zip(path, path[1:]))
    assert shortest_path(MazeSpec.named("junction-T"), (4, 4), (1, 1)) == [
        (4, 4), (3, 4), (2, 4), (1, 4), (1, 3), (1, 2), (1, 1),
    ]


def test_010():
    """Disconnected or walled cells are unreachable"""
    spec = MazeSpec(("#####", "#.#.#", "#####"))
    with pytest.raises(Unreachable) as info:
        shortest_path(spec, (1, 1), (1, 3))
    assert info.value.exit_code == 3
    with pytest.raises(Unreachable):
        shortest_path(corridor(), (1, 1), (0, 0))


def test_011():
    """LineRun integrates velocity and rewards it"""
    state, reward, done = linerun_step(LineRunState(), [1.0])
    assert state.v == pytest.approx(0.1)
    assert state.x == pytest.approx(0.01)
    assert reward == pytest.approx(0.1) and not done
    state, _, _ = linerun_step(LineRunState(v=1.0), [3.0])
    assert state.v == 1.0
    assert linerun_step(LineRunState(t=4), [0.0], horizon=5)[2]


def test_012():
    """The always-accelerate return over the default horizon"""
    assert expert_return() == pytest.approx(195.5)
    assert expert_return(5) == pytest.approx(1.5)


def test_013():
    """Unknown environment ids are usage errors"""
    with pytest.raises(UnknownEnv) as info:
        make_env("cartpole")
    assert info.value.exit_code == 2
    assert isinstance(make_env("linerun", episode_cap=50), LineRun)
    env = make_env("minimaze", "junction-T")
    assert isinstance(env, MiniMaze) and env.max_episode_steps == 200


def test_014(tmp_path):
    """Collection is deterministic and trajectory i depends only on (seed, i)"""
    env = make_env("minimaze", "corridor-S")
    config = CollectorConfig(n_trajectories=3, episode_length=30, reference_episodes=2)
    first = collect_dataset(env, config, 7, tmp_path / "a")
    second = collect_dataset(env, config, 7, tmp_path / "b")
    for name in ("meta.json", "trajectories.jsonl"):
        assert (first / name).read_bytes() == (second / name).read_bytes()

    longer = load_dataset(collect_dataset(env, config.replace(n_trajectories=5), 7, tmp_path / "c"))
    shorter = load_dataset(first)
    for a, b in zip(shorter.trajectories, longer.trajectories):
        assert np.array_equal(a.states, b.states)


def test_015(tmp_path):
    """Play data has fixed length and the dataset metadata matches the maze"""
    dataset = maze_dataset(tmp_path, n=30, episode_length=40)
    meta = dataset.meta
    assert (meta.state_dim, meta.action_dim, meta.goal_mode) == (4, 2, GoalMode.TARGET_STATE)
    assert meta.goal_subspace == [0, 1] and meta.layout == "corridor-S"
    assert set(meta.reference_scores) == {"random", "expert"}
    summary = audit(make_env("minimaze", "corridor-S"), dataset.trajectories)
    assert summary["n"] == 30
    assert summary["length"]["min"] == summary["length"]["max"] == 40
    assert summary["endpoint_task_fraction"] < 0.1
    spec = corridor()
    assert all(in_free_cell(spec, s[:2]) for tr in dataset.trajectories for s in tr.states)


def test_016(tmp_path):
    """Without noise the scripted expert reaches the goal on every trajectory of an open room"""
    spec = MazeSpec(("#######", "#S....#", "#.....#", "#.....#", "#.....#", "#....G#", "#######"), name="open")
    env = MiniMaze(spec)
    config = CollectorConfig(style="expert", noise=0.0)
    rng = RngStream(16)
    for i in range(50):
        traj = collect_trajectory(env, config, rng.split(i))
        assert traj.rewards[-1] == 1.0
        assert len(traj) < spec.episode_cap

    dataset = maze_dataset(tmp_path, n=4, style="expert")
    assert dataset.meta.reference_scores["expert"] > dataset.meta.reference_scores["random"]


def test_017(tmp_path):
    """LineRun data spans the horizon and references the expert return"""
    env = make_env("linerun", episode_cap=30)
    config = CollectorConfig(n_trajectories=3, reference_episodes=2)
    dataset = load_dataset(collect_dataset(env, config, 0, tmp_path))
    assert all(len(tr) == 30 for tr in dataset.trajectories)
    assert dataset.meta.goal_mode is GoalMode.RETURN_TO_GO
    assert dataset.meta.reference_scores["expert"] == pytest.approx(expert_return(30))
    summary = audit(env, dataset.trajectories)
    assert "success_fraction" not in summary


def test_018():
    """Resets land near the center of a start cell, at rest"""
    spec = corridor()
    env = MiniMaze(spec)
    for seed in range(20):
        state = env.reset(RngStream(seed))
        assert spec.cell_of(state.position) == (1, 1)
        assert np.abs(state.position - [1.5, 1.5]).max() <= 0.2
        assert np.array_equal(state.velocity, [0.0, 0.0])


def test_019():
    """Planned paths are exactly as long as a flood fill says, between every pair of open cells"""
    for name in layout_names():
        spec = MazeSpec.named(name)
        cells = spec.free_cells()
        for source in cells:
            distance = flood_distances(spec, source)
            assert set(distance) == set(cells)
            for target in cells:
                assert len(shortest_path(spec, source, target)) - 1 == distance[target]
        lone = plan_waypoints(spec, cells[0], cells[0])
        assert len(lone) == 1 and np.array_equal(lone[0], spec.center(cells[0]))


@pytest.mark.timeout(900)
def test_020():
    """A million random steps never leave a position inside a wall"""
    steps = 0
    for name in layout_names():
        spec = MazeSpec.named(name)
        free = spec.free_cells()
        rng = RngStream(20).split(name)
        for episode in range(1000):
            draw = rng.split(episode)
            state = maze_reset(spec, draw.split("reset"), free)
            for action in draw.split("actions").uniform(-1.5, 1.5, size=(500, 2)):
                state, _, _ = maze_step(spec, state, action)
                assert in_free_cell(spec, state.position)
            steps += 500
    assert steps == 1_000_000
