"""
Batched rotation maps on SO(3).

Arrays follow the (3, n) / (3, 3, n) layout used throughout the engine: the
trailing axis runs over elements.
"""

import numpy as np

_SMALL_ANGLE = 1e-8


def batch_cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product of two (3, n) arrays"""
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def batch_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum('in,in->n', a, b)


def batch_norm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum('in,in->n', a, a))


def batch_matvec(matrices: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """(3,3,n) @ (3,n) -> (3,n)"""
    return np.einsum('ijn,jn->in', matrices, vectors)


def batch_matTvec(matrices: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """(3,3,n)^T @ (3,n) -> (3,n)"""
    return np.einsum('jin,jn->in', matrices, vectors)


def batch_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum('ijn,jkn->ikn', a, b)


def exp_map(rotation_vectors: np.ndarray) -> np.ndarray:
    """Rodrigues formula: rotation vectors (3, n) to matrices exp([k]x), (3, 3, n)"""
    k = np.asarray(rotation_vectors, dtype=float)
    theta = batch_norm(k)
    n = k.shape[1]

    small = theta < _SMALL_ANGLE
    safe_theta = np.where(small, 1.0, theta)
    # sin(t)/t and (1-cos(t))/t^2 with series fallback
    a = np.where(small, 1.0 - theta ** 2 / 6.0, np.sin(safe_theta) / safe_theta)
    b = np.where(small, 0.5 - theta ** 2 / 24.0, (1.0 - np.cos(safe_theta)) / safe_theta ** 2)

    skew = np.zeros((3, 3, n))
    skew[0, 1] = -k[2]
    skew[0, 2] = k[1]
    skew[1, 0] = k[2]
    skew[1, 2] = -k[0]
    skew[2, 0] = -k[1]
    skew[2, 1] = k[0]

    result = np.zeros((3, 3, n))
    result[0, 0] = result[1, 1] = result[2, 2] = 1.0
    result += a * skew + b * batch_matmul(skew, skew)
    return result


def log_map(matrices: np.ndarray) -> np.ndarray:
    """Rotation vector of each rotation matrix, (3, 3, n) -> (3, n)"""
    R = matrices
    trace = R[0, 0] + R[1, 1] + R[2, 2]
    cos_theta = np.clip(0.5 * (trace - 1.0), -1.0, 1.0)
    theta = np.arccos(cos_theta)

    axial = np.array([
        R[2, 1] - R[1, 2],
        R[0, 2] - R[2, 0],
        R[1, 0] - R[0, 1],
    ])
    small = theta < _SMALL_ANGLE
    sin_theta = np.sin(theta)
    safe_sin = np.where(small, 1.0, sin_theta)
    factor = np.where(small, 0.5 + theta ** 2 / 12.0, 0.5 * theta / safe_sin)
    return factor * axial


def rotate_directors(directors: np.ndarray, rotation_vectors: np.ndarray) -> np.ndarray:
    """Advance directors by local rotation vectors: Q <- exp(-[k]x) Q"""
    return batch_matmul(exp_map(-rotation_vectors), directors)


def rotation_about_axis(axis, angle: float) -> np.ndarray:
    """Single 3x3 rotation matrix about ``axis`` by ``angle``"""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return exp_map((axis * angle).reshape(3, 1))[..., 0]


def orthonormalize(directors: np.ndarray) -> np.ndarray:
    """Gram-Schmidt on (d3, d1); d2 = d3 x d1"""
    d1 = directors[0]
    d3 = directors[2]
    d3 = d3 / batch_norm(d3)
    d1 = d1 - batch_dot(d1, d3) * d3
    d1 = d1 / batch_norm(d1)
    d2 = batch_cross(d3, d1)
    return np.stack([d1, d2, d3], axis=0)


def frames_from_tangent_normal(tangents: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Directors (3,3,n) with d3 along ``tangents`` and d1 from ``normals`` projected"""
    t = tangents / batch_norm(tangents)
    d1 = normals - batch_dot(normals, t) * t
    d1 = d1 / batch_norm(d1)
    d2 = batch_cross(t, d1)
    return np.stack([d1, d2, t], axis=0)


def parallel_transport(vectors: np.ndarray, from_tangents: np.ndarray, to_tangents: np.ndarray) -> np.ndarray:
    """Rotate ``vectors`` by the minimal rotation taking unit ``from`` onto unit ``to``"""
    w = batch_cross(from_tangents, to_tangents)
    c = batch_dot(from_tangents, to_tangents)
    wv = batch_cross(w, vectors)
    wwv = batch_cross(w, wv)
    return vectors + wv + wwv / (1.0 + c)


def signed_angle(a: np.ndarray, b: np.ndarray, axis: np.ndarray) -> np.ndarray:
    """Signed angle from a to b about ``axis`` (all (3, n))"""
    return np.arctan2(batch_dot(batch_cross(a, b), axis), batch_dot(a, b))
