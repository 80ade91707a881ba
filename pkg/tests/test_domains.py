"""Open-domain descriptors and the small shared helpers."""

from __future__ import annotations

import numpy as np
import pytest

from evfam.domains import DomainDescriptor, box_domain, full_space, positive_orthant
from evfam.numdiff import fd_gradient, fd_hessian, fd_jacobian
from evfam.util import as_batch, parallel_map


def test_box_membership_is_strict():
    dom = box_domain([0.0], [1.0])
    assert dom.contains(np.array([0.5]))
    assert not dom.contains(np.array([0.0]))
    assert not dom.contains(np.array([1.0]))
    assert not dom.contains(np.array([np.nan]))
    assert not dom.contains(np.array([np.inf]))


def test_box_margin_shrinks_both_sides():
    dom = box_domain([0.0], [1.0])
    assert not dom.contains(np.array([0.05]), margin=0.1)
    assert dom.contains(np.array([0.5]), margin=0.1)


def test_halfspace_product_keeps_bounds():
    dom = DomainDescriptor("half-space-product", 2, None, np.array([0.5, np.inf]))
    assert dom.is_box_like()
    assert dom.contains(np.array([0.0, 100.0]))
    assert not dom.contains(np.array([0.5, 0.0]))


def test_custom_predicate_combines_with_box():
    dom = DomainDescriptor("custom-predicate", 2, np.array([0.0, -np.inf]), None,
                           predicate=lambda x: x[0] > x[1] * x[1])
    assert dom.contains(np.array([4.0, 1.5]))
    assert not dom.contains(np.array([1.0, 1.5]))
    assert not dom.contains(np.array([-1.0, 0.0]))


def test_domain_validation_errors():
    with pytest.raises(ValueError):
        DomainDescriptor("blob", 1)
    with pytest.raises(ValueError):
        box_domain([1.0], [0.0])
    with pytest.raises(ValueError):
        DomainDescriptor("custom-predicate", 1)
    dom = positive_orthant(2)
    with pytest.raises(ValueError):
        dom.contains(np.array([1.0]))


def test_shift_translates_boxes_only():
    dom = box_domain([0.0, -1.0], [2.0, 1.0])
    moved = dom.shifted(np.array([1.0, 1.0]))
    assert moved.contains(np.array([2.5, 1.5]))
    assert not moved.contains(np.array([0.5, 0.0]))
    custom = DomainDescriptor("custom-predicate", 1, predicate=lambda x: True)
    with pytest.raises(ValueError):
        custom.shifted(np.array([1.0]))


def test_clipped_interior_bounds_infinities():
    lo, hi = full_space(2).clipped_interior(-8.0, 8.0)
    assert np.array_equal(lo, [-8.0, -8.0]) and np.array_equal(hi, [8.0, 8.0])
    lo, hi = positive_orthant(1).clipped_interior(1e-4, 1e4)
    assert lo[0] == 1e-4 and hi[0] == 1e4


def test_parallel_map_preserves_order():
    items = list(range(37))
    assert parallel_map(lambda v: v * v, items) == [v * v for v in items]


def test_as_batch_scalar_and_vector_elements():
    batch, single = as_batch(3.0, 0)
    assert single and batch.shape == (1,)
    batch, single = as_batch(np.array([1.0, 2.0, 3.0]), 0)
    assert not single and batch.shape == (3,)
    batch, single = as_batch(np.array([1.0, 2.0]), 1)
    assert single and batch.shape == (1, 2)
    batch, single = as_batch(np.ones((5, 2)), 1)
    assert not single and batch.shape == (5, 2)


def test_finite_differences_on_polynomials():
    f = lambda x: x[0] ** 3 + 2.0 * x[0] * x[1]
    x = np.array([1.2, -0.7])
    assert np.allclose(fd_gradient(f, x), [3 * 1.2 ** 2 + 2 * -0.7, 2 * 1.2],
                       rtol=1e-7)
    hess = fd_hessian(f, x)
    assert np.allclose(hess, [[6 * 1.2, 2.0], [2.0, 0.0]], atol=1e-5)
    g = lambda x: np.array([x[0] * x[1], x[1] ** 2])
    jac = fd_jacobian(g, x)
    assert np.allclose(jac, [[-0.7, 1.2], [0.0, 2 * -0.7]], rtol=1e-6, atol=1e-9)
