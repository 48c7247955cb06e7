import numpy as np
import pytest

from inbetween.core_math import rot6d_to_matrix
from inbetween.errors import ParseError, ResampleError, RetargetError, SplitError
from inbetween.motion import (
    GaitStyle,
    MotionClip,
    clip_to_bvh,
    default_skeleton,
    make_catalog,
    make_splits,
    mirror_clip,
    parse_bvh,
    synth_gait,
    synthetic_dataset,
    write_bvh,
)
from inbetween.motion.bvh import to_local
from inbetween.motion.clip import (
    contact_labels,
    crop_windows,
    facing_yaw,
    orient_to_x,
    resample_to_30fps,
    retarget_drop_joints,
)
from inbetween.motion.dataset import MotionDataset
from inbetween.motion.skeleton import full_rig
from inbetween.motion.splits import subset_sizes

BVH = """HIERARCHY
ROOT Hips
{
  OFFSET 0 90 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Yrotation Xrotation
  JOINT Spine
  {
    OFFSET 0 10 0
    CHANNELS 3 Zrotation Yrotation Xrotation
    End Site
    {
      OFFSET 0 5 0
    }
  }
}
MOTION
Frames: 2
Frame Time: 0.0333333
0 90 0 0 0 0 0 0 0
1 90 0 90 0 0 0 0 0
"""


@pytest.fixture(scope="module")
def gait():
    return synth_gait(GaitStyle(), 150, seed=3)


def test_parse_bvh_and_forward_kinematics():
    data = parse_bvh(BVH)
    assert data.skeleton.names == ["Hips", "Spine"]
    assert data.motion.shape == (2, 9)
    root, local = to_local(data)
    clip = MotionClip.from_local(data.skeleton, root, local)
    # the root channel is added to the root offset; 90 degrees about z
    # turns the spine offset (0, 10, 0) into (-10, 0, 0)
    np.testing.assert_allclose(clip.positions[1, 0], [1, 180, 0], atol=1e-9)
    np.testing.assert_allclose(clip.positions[1, 1], [1 - 10, 180, 0], atol=1e-9)


def test_bvh_write_parse_roundtrip():
    data = parse_bvh(BVH)
    again = parse_bvh(write_bvh(data))
    np.testing.assert_allclose(again.motion, data.motion, atol=1e-6)
    assert again.skeleton.parents == data.skeleton.parents


@pytest.mark.parametrize("bad", [BVH.replace("Frames: 2", "Frames: 3"), BVH.replace("0 90 0 0 0 0 0 0 0", "0 x"), "HIER"])
def test_parse_bvh_errors(bad):
    with pytest.raises(ParseError):
        parse_bvh(bad)


def test_clip_to_bvh_reproduces_positions(gait):
    data = clip_to_bvh(gait.slice(0, 20))
    root, local = to_local(data)
    back = MotionClip.from_local(data.skeleton, root, local)
    np.testing.assert_allclose(back.positions, gait.positions[:20], atol=1e-4)


def test_resample_and_retarget():
    x = np.arange(12)
    np.testing.assert_array_equal(resample_to_30fps(x, 120), x[::4])
    with pytest.raises(ResampleError):
        resample_to_30fps(x, 25)
    sk = full_rig()
    T = 2
    local = np.tile(np.eye(3), (T, len(sk), 1, 1))
    with pytest.raises(RetargetError):
        retarget_drop_joints(sk, np.zeros((T, 3)), local, ["LeftWrist"])


def test_default_skeleton_and_features(gait):
    sk = default_skeleton()
    assert len(gait.skeleton) == len(sk)
    assert gait.frames().shape == (150, len(sk), 12)
    R = rot6d_to_matrix(gait.rotations)
    np.testing.assert_allclose(np.linalg.det(R), 1.0, atol=1e-9)


def test_velocity_is_forward_difference(gait):
    np.testing.assert_allclose(gait.velocities[1:], np.diff(gait.positions, axis=0), atol=1e-9)


def test_mirror_is_involution(gait):
    twice = mirror_clip(mirror_clip(gait))
    np.testing.assert_allclose(twice.positions, gait.positions, atol=1e-12)
    np.testing.assert_allclose(twice.rotations, gait.rotations, atol=1e-12)
    once = mirror_clip(gait)
    # mirrored rotations are still proper rotations
    np.testing.assert_allclose(np.linalg.det(rot6d_to_matrix(once.rotations)), 1.0, atol=1e-9)


def test_orient_to_x(gait):
    o = orient_to_x(gait.slice(40, 100))
    h = o.skeleton.hip_index
    assert facing_yaw(o.rotations[0, h]) == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(o.positions[0, h, [0, 2]], 0.0, atol=1e-9)


def test_planted_feet_do_not_slip(gait):
    stance = gait.extras["stance"]
    feet = [gait.skeleton.index(n) for n in ("LeftAnkle", "RightAnkle")]
    for k, j in enumerate(feet):
        v = np.linalg.norm(gait.velocities[1:, j, [0, 2]], axis=-1)
        both = stance[1:, k] & stance[:-1, k]
        assert v[both].max() < 1e-6


def test_gait_moves_and_turns():
    clip = synth_gait(GaitStyle(stride=70, cadence=1.0), 300, seed=5)
    hip = clip.positions[:, 0, [0, 2]]
    speed = np.linalg.norm(np.diff(hip, axis=0), axis=-1)
    assert speed.mean() > 1.0
    assert speed.std() > 0.1
    yaw = np.unwrap(facing_yaw(clip.rotations[:, 0]))
    assert np.ptp(yaw) > 0.05


def test_idle_style_stays_put():
    clip = synth_gait(GaitStyle(stride=0.0, leg_lift=0.0), 120, seed=1)
    feet = clip.skeleton.foot_indices
    assert np.ptp(clip.positions[:, feet][..., [0, 2]], axis=0).max() < 1e-6


def test_contact_labels_range(gait):
    c = contact_labels(gait)
    assert c.shape == (150, 4)
    assert c.min() >= 0 and c.max() <= 1
    assert (c == 1).any() and (c < 1).any()


def test_crop_windows_overlap(gait):
    w = crop_windows(gait, 60, 20)
    assert [len(x) for x in w] == [60, 60, 60]
    np.testing.assert_array_equal(w[1].positions[0], gait.positions[40])
    assert crop_windows(gait.slice(0, 10), 60) == []


def test_catalog_is_deterministic():
    a, b = make_catalog(5, seed=2), make_catalog(5, seed=2)
    assert a == b
    assert len({s.name for s in a}) == 5


def test_splits_partition_clips():
    styles = [f"s{i}" for i in range(10)]
    clip_styles = [s for s in styles for _ in range(8)]
    sp = make_splits(styles, clip_styles, seed=0)
    assert subset_sizes(10) == (5, 4, 1)
    every = sorted(sp.train + sp.test_overlap + sp.test_no_overlap)
    assert every == list(range(80))
    assert {clip_styles[i] for i in sp.test_no_overlap} == {"s9"}
    assert len(sp.test_overlap) == 9
    with pytest.raises(SplitError):
        make_splits(styles[:3], clip_styles[:24])


def test_synthetic_dataset_cache_roundtrip(tmp_path):
    ds = synthetic_dataset(styles=3, clips=1, frames=40, seed=0)
    path = tmp_path / "clips.rsmt"
    ds.save(path)
    back = MotionDataset.load(path)
    assert back.styles == ds.styles
    np.testing.assert_allclose(back.clips[0].positions, ds.clips[0].positions, atol=1e-3)
