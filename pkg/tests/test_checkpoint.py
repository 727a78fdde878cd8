import pytest
from retsynth.load import load_checkpoint, read_checkpoint, restore_checkpoint, save_checkpoint
from retsynth.networks import build_classifier, build_mlp
from retsynth.shared.errors import CheckpointError


@pytest.fixture
def saved(tmp_path, tiny_generator, tiny_critic):
    path = tmp_path / "wgan.bin"
    save_checkpoint({"generator": tiny_generator, "critic": tiny_critic}, {"step": 12, "seed": 3}, path)
    return path


def test_round_trip(saved, tiny_generator, tiny_critic):
    networks, counters = load_checkpoint(saved, expected_kinds={"generator": "dcgan_generator"})
    assert networks["generator"].checksum() == tiny_generator.checksum()
    assert networks["critic"].checksum() == tiny_critic.checksum()
    assert networks["critic"].spec == tiny_critic.spec
    assert counters == {"step": 12, "epoch": 0, "seed": 3}


def test_buffers_survive(tmp_path, tiny_classifier, rng):
    tiny_classifier.train()
    tiny_classifier(rng.normal(size=(4, 1, 16, 16)))
    path = save_checkpoint({"classifier": tiny_classifier}, {}, tmp_path / "c.bin")
    loaded = load_checkpoint(path)[0]["classifier"]
    for name, buffer in tiny_classifier.buffers().items():
        assert (loaded.buffers()[name] == buffer).all()


def test_no_temporary_files_are_left(saved):
    assert sorted(p.name for p in saved.parent.iterdir()) == ["wgan.bin"]


def test_saving_replaces_atomically(saved, tiny_generator):
    save_checkpoint({"generator": tiny_generator}, {"step": 1}, saved)
    entries, counters = read_checkpoint(saved)
    assert list(entries) == ["generator"] and counters["step"] == 1


@pytest.mark.parametrize("cut", [3, 20, -1])
def test_truncated_files_are_rejected(saved, cut):
    data = saved.read_bytes()
    saved.write_bytes(data[:cut])
    with pytest.raises(CheckpointError):
        load_checkpoint(saved)


def test_corrupt_bytes_fail_the_checksum(saved):
    data = bytearray(saved.read_bytes())
    data[len(data) // 2] ^= 0xFF
    saved.write_bytes(bytes(data))
    with pytest.raises(CheckpointError, match="checksum"):
        read_checkpoint(saved)


def test_failed_restore_leaves_networks_untouched(saved, tmp_path):
    generator = build_mlp(2, [3], 1)
    before = generator.checksum()
    data = bytearray(saved.read_bytes())
    data[-1] ^= 0x01
    corrupt = tmp_path / "corrupt.bin"
    corrupt.write_bytes(bytes(data))
    with pytest.raises(CheckpointError):
        restore_checkpoint(corrupt, {"generator": generator})
    with pytest.raises(CheckpointError, match="expected mlp"):
        restore_checkpoint(saved, {"generator": generator})
    assert generator.checksum() == before


def test_restore_checks_tensor_shapes(tmp_path):
    small = build_classifier(num_classes=3, img_size=16, img_channels=1, base_ch=8)
    large = build_classifier(num_classes=3, img_size=16, img_channels=1, base_ch=16)
    path = save_checkpoint({"classifier": small}, {}, tmp_path / "c.bin")
    before = large.checksum()
    with pytest.raises(CheckpointError, match="do not match"):
        restore_checkpoint(path, {"classifier": large})
    assert large.checksum() == before


def test_kind_and_role_checks(saved):
    with pytest.raises(CheckpointError, match="expected classifier"):
        load_checkpoint(saved, expected_kinds={"generator": "classifier"})
    with pytest.raises(CheckpointError, match="no network with role"):
        load_checkpoint(saved, expected_kinds={"classifier": "classifier"})


def test_non_checkpoint_file(tmp_path):
    path = tmp_path / "image.pgm"
    path.write_bytes(b"P5\n1 1\n255\n\x00")
    with pytest.raises(CheckpointError, match="not a checkpoint"):
        read_checkpoint(path)
