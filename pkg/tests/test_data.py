import numpy as np
import pytest

from certsynth.data import TrajectoryData, build_n0, check_rank, load_matrix, load_matrix_path
from certsynth.errors import FileParseError, RankDeficientError, SampleCountError
from certsynth.poly import parse_monomials


class TestLoadMatrix:
    def test_csv(self):
        mat = load_matrix("1,2,3\n4,5,6", "csv")
        assert np.array_equal(mat, [[1, 2, 3], [4, 5, 6]])

    def test_txt_whitespace(self):
        mat = load_matrix("1 2 3\n4 5 6\n", "txt")
        assert np.array_equal(mat, [[1, 2, 3], [4, 5, 6]])

    def test_json_identity(self):
        mat = load_matrix("[[1,0],[0,1]]", "json")
        assert np.array_equal(mat, np.eye(2))

    def test_ragged_csv_rejected(self):
        with pytest.raises(FileParseError) as err:
            load_matrix("1,2\n3", "csv")
        assert str(err.value) == "Unable to parse uploaded file(s)"

    def test_nan_rejected(self):
        with pytest.raises(FileParseError):
            load_matrix("1,nan\n2,3", "csv")
        with pytest.raises(FileParseError):
            load_matrix("[[1e999,0]]", "json")

    def test_garbage_rejected(self):
        with pytest.raises(FileParseError):
            load_matrix("hello,world", "csv")
        with pytest.raises(FileParseError):
            load_matrix('{"not": "a matrix"}', "json")

    def test_path_loading(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,2\n3,4\n")
        assert np.array_equal(load_matrix(path, "csv"), [[1, 2], [3, 4]])
        assert np.array_equal(load_matrix_path(path), [[1, 2], [3, 4]])

    def test_unknown_suffix(self, tmp_path):
        path = tmp_path / "m.xls"
        path.write_text("1,2")
        with pytest.raises(FileParseError):
            load_matrix_path(path)


class TestBuildN0:
    def test_identity_lift_returns_x0(self):
        basis = parse_monomials("x1; x2", 2)
        x0 = np.array([[1.0, 2.0, -1.0], [3.0, 4.0, 0.5]])
        assert np.array_equal(build_n0(x0, basis).n0, x0)

    def test_product_lift(self):
        basis = parse_monomials("x1; x2; x1*x2", 2)
        x0 = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(build_n0(x0, basis).n0, [[1, 2], [3, 4], [3, 8]])

    def test_square_lift(self):
        basis = parse_monomials("x1**2", 1)
        assert np.array_equal(build_n0(np.array([[-2.0, 3.0]]), basis).n0, [[4, 9]])


class TestCheckRank:
    def test_full_rank_passes(self):
        check_rank(np.array([[1.0, 0, 1], [0, 1, 1]]), "linear-state")
        check_rank(np.array([[1.0, 0, 1], [0, 1, 1]]), "lifted")

    def test_rank_deficient_linear(self):
        with pytest.raises(RankDeficientError) as err:
            check_rank(np.array([[1.0, 2, 3], [2, 4, 6]]), "linear-state")
        assert str(err.value) == "The X0 data is not full row-rank"

    def test_rank_deficient_lifted(self):
        with pytest.raises(RankDeficientError) as err:
            check_rank(np.array([[1.0, 2, 3], [2, 4, 6]]), "lifted")
        assert str(err.value) == "The N0 data is not full row-rank"

    def test_too_few_samples_lifted(self):
        with pytest.raises(SampleCountError) as err:
            check_rank(np.eye(3), "lifted")
        assert (
            str(err.value)
            == "The number of samples, T, must be greater than the number of monomial terms, N"
        )

    def test_too_few_samples_linear(self):
        with pytest.raises(SampleCountError) as err:
            check_rank(np.eye(3), "linear-state")
        assert (
            str(err.value)
            == "The number of samples, T, must be greater than the number of states, n"
        )

    def test_verdict_invariant_under_permutation_and_scaling(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            mat = rng.normal(size=(3, 7))
            if rng.uniform() < 0.5:
                mat[2] = 2.0 * mat[0] - mat[1]  # force deficiency
            perm = rng.permutation(7)
            scales = rng.choice([-3.0, -0.5, 0.25, 2.0], size=3)
            variant = (mat * scales[:, None])[:, perm]

            def verdict(m):
                try:
                    check_rank(m, "linear-state")
                    return "ok"
                except RankDeficientError:
                    return "deficient"

            assert verdict(mat) == verdict(variant)


class TestTrajectoryData:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            TrajectoryData(
                u0=np.zeros((1, 4)),
                x0=np.zeros((2, 5)),
                x1=np.zeros((2, 5)),
                time_domain="discrete",
            )
        with pytest.raises(ValueError):
            TrajectoryData(
                u0=np.zeros((1, 5)),
                x0=np.zeros((2, 5)),
                x1=np.zeros((3, 5)),
                time_domain="discrete",
            )

    def test_dimensions(self):
        data = TrajectoryData(
            u0=np.zeros((1, 5)),
            x0=np.zeros((2, 5)),
            x1=np.zeros((2, 5)),
            time_domain="continuous",
            tau=0.1,
        )
        assert (data.n_inputs, data.n_states, data.n_samples) == (1, 2, 5)
