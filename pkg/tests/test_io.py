r"""Test io."""

import numpy as np
import pytest

from divcurl_forge.cartan_realization import (
    connection_forms,
    frame_matrix,
    reconstruct,
)
from divcurl_forge.errors import ContainerError
from divcurl_forge.grid_complex import Cochain, PeriodicGrid, hodge_star
from divcurl_forge.immersion_geometry import fundamental_data
from divcurl_forge.io import (
    load_arrays,
    load_cochain,
    load_frame_integral,
    save_arrays,
    save_cochain,
    save_frame_integral,
    sidecar_path,
)
from divcurl_forge.surfaces import golden_surface


class Test:
    r"""Test."""

    @staticmethod
    def test_cochain(tmp_path) -> None:
        r"""Test cochain.

        :param tmp_path:
        :rtype: None
        """
        grid = PeriodicGrid(3, (4, 6, 8), (1.0, 2.0, 0.5))
        rng = np.random.default_rng(0)
        c = hodge_star(Cochain(grid, 1, rng.standard_normal(3 * 192)))
        path = tmp_path / "star.dcch"
        save_cochain(c, path)
        assert path.stat().st_size == 8 + 4 * 3 + 8 * c.values.size
        assert sidecar_path(path).exists()
        loaded = load_cochain(path)
        assert loaded.grid == grid
        assert loaded.degree == 2
        assert loaded.dual
        np.testing.assert_array_equal(loaded.values, c.values)

    @staticmethod
    def test_bad_cochain(tmp_path) -> None:
        r"""Test bad cochain.

        :param tmp_path:
        :rtype: None
        """
        path = tmp_path / "bad.dcch"
        path.write_bytes(b"NOPE" + bytes(16))
        with pytest.raises(ContainerError):
            load_cochain(path)
        grid = PeriodicGrid.uniform(2, 4)
        save_cochain(Cochain.zeros(grid, 1), path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ContainerError):
            load_cochain(path)

    @staticmethod
    def test_arrays(tmp_path) -> None:
        r"""Test arrays.

        :param tmp_path:
        :rtype: None
        """
        path = tmp_path / "arrays.geom"
        arrays = {"a": np.arange(6.0).reshape(2, 3), "b": np.ones(4)}
        save_arrays(path, arrays, {"label": "test"})
        loaded, metadata = load_arrays(path)
        assert metadata == {"label": "test"}
        for name, values in arrays.items():
            np.testing.assert_array_equal(loaded[name], values)
        sidecar_path(path).unlink()
        with pytest.raises(ContainerError):
            load_arrays(path)

    @staticmethod
    def test_frame_integral(tmp_path) -> None:
        r"""Test frame integral.

        :param tmp_path:
        :rtype: None
        """
        surface = golden_surface("cylinder", 16, analytic=True)
        fd = fundamental_data(surface.immersion)
        fp = connection_forms(surface.chart, fd)
        fi = reconstruct(fp, frame_matrix(fd)[0, 0], surface.immersion.f[0, 0])
        path = tmp_path / "cylinder.geom"
        save_frame_integral(fi, path)
        loaded = load_frame_integral(path)
        assert loaded.chart.resolution == fi.chart.resolution
        assert loaded.tree == fi.tree
        assert loaded.base == fi.base
        assert loaded.holonomy_defect == fi.holonomy_defect
        np.testing.assert_array_equal(loaded.A, fi.A)
        np.testing.assert_array_equal(loaded.f, fi.f)
