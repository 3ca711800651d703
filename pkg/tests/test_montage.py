import itertools
import math

import numpy as np
import pytest

from scalpstream.montage import (Electrode, Montage, geodesic_distance,
                                 load_montage, standard_montage)

REQUIRED = {"C3", "Cz", "C4", "P3", "Pz", "P4", "PO3", "PO4",
            "O1", "Oz", "O2", "AFz", "Fp1", "Fp2"}


def test_canonical_layout(montage):
    assert len(montage) == 32
    assert len(set(montage.labels)) == 32
    assert REQUIRED <= set(montage.labels)


def test_cz_at_vertex(montage):
    assert np.allclose(montage.position("Cz"), [0.0, 0.0, 1.0], atol=1e-12)


def test_positions_unit_norm(montage):
    norms = np.linalg.norm(montage.positions, axis=1)
    assert np.all(np.abs(norms - 1.0) < 1e-9)


def test_uv_in_unit_square(montage):
    assert montage.uvs.min() >= 0.0
    assert montage.uvs.max() <= 1.0


def test_laplacian_neighbor_sets(montage):
    assert montage.laplacian_neighbors["C3"] == {"FC5", "FC1", "CP5", "CP1"}
    assert montage.laplacian_neighbors["C4"] == {"FC2", "FC6", "CP2", "CP6"}
    assert montage.laplacian_neighbors["Cz"] == {"FC1", "FC2", "CP1", "CP2"}


def test_laplacian_neighbors_are_nearest_in_row(montage):
    # oracle: the chosen surround must be the nearest same-row electrodes
    # by great-circle distance
    for center, rows in [("C3", ("FC", "CP")), ("C4", ("FC", "CP"))]:
        chosen = montage.laplacian_neighbors[center]
        c = montage.position(center)
        for row in rows:
            candidates = [l for l in montage.labels if l.startswith(row)]
            dists = sorted(candidates, key=lambda l: geodesic_distance(c, montage.position(l)))
            assert set(dists[:2]) == chosen & set(candidates)


def test_regions(montage):
    assert montage.regions["VISION"] == {"P3", "Pz", "P4", "PO3", "PO4", "O1", "Oz", "O2"}
    assert montage.regions["MEDITATION_PAIR"] == {"AFz", "Pz"}
    assert montage.regions["MOTOR_CENTERS"] == {"C3", "Cz", "C4"}
    assert montage.regions["BLINK"] == {"Fp1", "Fp2"}
    for labels in montage.regions.values():
        assert set(labels) <= set(montage.labels)


def test_geodesic_identity_and_antipode(montage):
    cz = montage.position("Cz")
    assert geodesic_distance(cz, cz) == 0.0
    assert abs(geodesic_distance(cz, -cz) - math.pi) < 1e-12


def test_geodesic_symmetry(montage):
    a, b = montage.position("F3"), montage.position("P4")
    assert geodesic_distance(a, b) == geodesic_distance(b, a)


def test_geodesic_o1_o2(montage):
    # both sit on the equator ring at azimuth -162 and +162 degrees
    expected = math.radians(36.0)
    assert abs(geodesic_distance(montage.position("O1"), montage.position("O2"))
               - expected) < 1e-9


def test_geodesic_triangle_inequality(montage):
    pos = montage.positions
    d = np.arccos(np.clip(pos @ pos.T, -1, 1))
    for i, j, k in itertools.combinations(range(32), 3):
        assert d[i, j] <= d[i, k] + d[k, j] + 1e-12


def test_uv_injective_at_64(montage):
    pixels = {(int(u * 64), int(v * 64)) for u, v in montage.uvs}
    assert len(pixels) == 32


def test_save_load_roundtrip(montage, tmp_path):
    path = tmp_path / "cap.txt"
    montage.save(path)
    again = load_montage(path)
    assert again.labels == montage.labels
    assert np.allclose(again.positions, montage.positions, atol=1e-11)
    assert np.allclose(again.uvs, montage.uvs, atol=1e-11)


def test_load_rejects_malformed_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("Cz 0 0 1\n")
    with pytest.raises(ValueError, match="expected 'label x y z u v'"):
        load_montage(path)


def test_montage_rejects_wrong_count(montage):
    with pytest.raises(ValueError, match="exactly 32"):
        Montage(montage.electrodes[:31])


def test_montage_rejects_missing_required(montage):
    # swap AFz out for a new label; count stays 32 but a required name is gone
    swapped = [e if e.name != "AFz" else Electrode("AF3", e.pos, e.uv)
               for e in montage.electrodes]
    with pytest.raises(ValueError, match="AFz"):
        Montage(swapped)


def test_montage_rejects_non_unit_position(montage):
    bad = [e if e.name != "Oz" else Electrode("Oz", (0.0, -2.0, 0.0), e.uv)
           for e in montage.electrodes]
    with pytest.raises(ValueError, match="unit-norm"):
        Montage(bad)
