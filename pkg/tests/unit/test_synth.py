import os
import sys
import unittest

import numpy as np
from numpy.testing import assert_allclose

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..', 'src'))

from ebrpca.domain.exceptions import ErrorCode, ExceptionNode
from ebrpca.domain.synth import (
    PhotoSpec,
    SynthSpec,
    estimate_normals,
    gen_low_rank,
    gen_photometric,
    gen_problem,
    gen_sparse,
    rng_for,
)


class SynthSpecTests(unittest.TestCase):
    def test_bounds(self):
        for kwargs in ({"m": 5, "n": 4, "rank": 1}, {"m": 4, "n": 8, "rank": 0}, {"m": 4, "n": 8, "rank": 5},
                       {"m": 4, "n": 8, "rank": 1, "corruption_prob": 1.5},
                       {"m": 4, "n": 8, "rank": 1, "seed": -1}):
            with self.assertRaises(ExceptionNode) as ctx:
                SynthSpec(**kwargs)
            self.assertEqual(ctx.exception.error_code, ErrorCode.INVALID_OPTIONS)


class LowRankTests(unittest.TestCase):
    def test_full_rank_is_the_raw_draw(self):
        spec = SynthSpec(m=6, n=9, rank=6, seed=4)
        draw = rng_for(4, 0).standard_normal((6, 9))
        assert_allclose(gen_low_rank(spec), draw, atol=1e-10)

    def test_rank_and_singular_values(self):
        for seed, (m, n, r) in enumerate([(10, 40, 3), (20, 60, 8), (5, 5, 2)]):
            spec = SynthSpec(m=m, n=n, rank=r, seed=seed)
            x = gen_low_rank(spec)
            sv = np.linalg.svd(x, compute_uv=False)
            self.assertEqual(int(np.count_nonzero(sv > 1e-9 * sv[0])), r)
            raw = np.linalg.svd(rng_for(seed, 0).standard_normal((m, n)), compute_uv=False)
            assert_allclose(sv[:r], raw[:r], rtol=1e-10)

    def test_rank_one_columns_are_parallel(self):
        x = gen_low_rank(SynthSpec(m=5, n=12, rank=1, seed=1))
        u = x[:, 0] / np.linalg.norm(x[:, 0])
        for j in range(12):
            col = x[:, j]
            assert_allclose(col, (u @ col) * u, atol=1e-10)


class SparseTests(unittest.TestCase):
    def test_extremes(self):
        self.assertFalse(gen_sparse(SynthSpec(m=4, n=10, rank=1, corruption_prob=0.0)).any())
        s = gen_sparse(SynthSpec(m=4, n=10, rank=1, corruption_prob=1.0))
        self.assertTrue(np.all(s != 0.0))
        self.assertTrue(np.all(np.abs(s) <= 10.0))

    def test_density(self):
        s = gen_sparse(SynthSpec(m=200, n=1000, rank=1, corruption_prob=0.2, seed=3))
        self.assertAlmostEqual(float(np.mean(s != 0.0)), 0.2, delta=0.01)

    def test_range(self):
        s = gen_sparse(SynthSpec(m=20, n=50, rank=1, corruption_prob=0.5, corruption_range=2.5))
        self.assertLessEqual(float(np.abs(s).max()), 2.5)


class ProblemTests(unittest.TestCase):
    def test_clean_full_rank(self):
        inst = gen_problem(SynthSpec(m=4, n=6, rank=4, corruption_prob=0.0))
        assert_allclose(inst.problem.y, inst.x_true)
        self.assertFalse(inst.s_true.any())
        self.assertEqual(inst.problem.lam, 1e-6)

    def test_deterministic(self):
        spec = SynthSpec(m=5, n=8, rank=2, corruption_prob=0.3, seed=11)
        a, b = gen_problem(spec), gen_problem(spec)
        self.assertTrue(np.array_equal(a.problem.y, b.problem.y))
        self.assertTrue(np.array_equal(a.s_true, b.s_true))

    def test_low_rank_part_ignores_corruption_settings(self):
        a = gen_problem(SynthSpec(m=5, n=8, rank=2, corruption_prob=0.1, seed=2))
        b = gen_problem(SynthSpec(m=5, n=8, rank=2, corruption_prob=0.6, seed=2))
        self.assertTrue(np.array_equal(a.x_true, b.x_true))
        self.assertFalse(np.array_equal(a.s_true, b.s_true))


class PhotometricTests(unittest.TestCase):
    def test_orthogonal_lights_without_corruption(self):
        spec = PhotoSpec(num_lights=3, num_pixels=200, corruption_prob=0.0, seed=5,
                         lights=((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)))
        inst = gen_photometric(spec)
        self.assertFalse(inst.shadow_mask.any())
        self.assertTrue(np.array_equal(inst.problem.y, inst.x_true))
        normals, albedo = estimate_normals(inst.problem.y, inst.lights)
        assert_allclose(normals, inst.normals, atol=1e-10)
        assert_allclose(albedo, inst.albedo, rtol=1e-10)

    def test_structure_of_default_instance(self):
        inst = gen_photometric(PhotoSpec(seed=1))
        y = inst.problem.y
        self.assertEqual(y.shape, (20, 5000))
        self.assertEqual(int(np.linalg.matrix_rank(inst.x_true)), 3)
        assert_allclose(np.linalg.norm(inst.lights, axis=0), 1.0)
        self.assertTrue(np.all(inst.lights[2] >= np.cos(np.radians(60.0)) - 1e-12))
        self.assertLess(float(np.mean(inst.corruption_mask)), 0.25)
        self.assertTrue(np.all(np.mean(inst.shadow_mask, axis=0) <= 0.1))
        self.assertTrue(np.all(y[inst.shadow_mask] == 0.0))
        self.assertFalse((inst.shadow_mask & inst.specular_mask).any())
        self.assertTrue(np.all(inst.s_true[inst.specular_mask] > 0.0))

    def test_deterministic(self):
        spec = PhotoSpec(num_lights=6, num_pixels=300, seed=9)
        a, b = gen_photometric(spec), gen_photometric(spec)
        self.assertTrue(np.array_equal(a.problem.y, b.problem.y))

    def test_invalid_specs(self):
        with self.assertRaises(ExceptionNode):
            PhotoSpec(num_lights=2)
        with self.assertRaises(ExceptionNode) as ctx:
            PhotoSpec(num_lights=3, lights=((1.0, 0.0), (0.0, 1.0), (0.0, 0.0)))
        self.assertEqual(ctx.exception.error_code, ErrorCode.SHAPE_MISMATCH)
        with self.assertRaises(ExceptionNode) as ctx:
            estimate_normals(np.ones((4, 5)), np.eye(3))
        self.assertEqual(ctx.exception.error_code, ErrorCode.SHAPE_MISMATCH)


if __name__ == "__main__":
    unittest.main()
