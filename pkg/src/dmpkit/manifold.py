"""Riemannian primitives for unit quaternions, rotation matrices, and SPD matrices.

Conventions
-----------
* Quaternions are length-4 arrays ``[w, x, y, z]`` (scalar part first) and are
  kept at unit norm.  ``quat_log`` maps into R^3, ``quat_exp`` maps back from
  the open ball of radius pi.
* Rotations are 3x3 orthonormal matrices with determinant +1.
* SPD matrices carry the affine-invariant metric.  Tangent vectors are
  symmetric matrices attached to a base point; ``spd_transport`` moves them
  between base points, ``mandel_vec``/``mandel_mat`` flatten them isometrically.
"""

import numpy as np

from .errors import DimensionMismatch, DomainError, NotSpd

_UNIT_TOL = 1e-6


# ---------------------------------------------------------------------------
# unit quaternions
# ---------------------------------------------------------------------------

def quat_product(q1, q2):
    """Hamilton product of two quaternions, scalar part first."""
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if q1.shape != (4,) or q2.shape != (4,):
        raise DimensionMismatch("quaternions must be length-4 arrays")
    w1, v1 = q1[0], q1[1:]
    w2, v2 = q2[0], q2[1:]
    out = np.empty(4)
    out[0] = w1 * w2 - v1 @ v2
    out[1:] = w1 * v2 + w2 * v1 + np.cross(v1, v2)
    return out


def quat_conjugate(q):
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise DimensionMismatch("quaternions must be length-4 arrays")
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_normalize(q):
    """Rescale to unit norm; zero quaternions are rejected."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise DomainError("cannot normalize a zero quaternion")
    return q / n


def _check_unit(q):
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise DimensionMismatch("quaternions must be length-4 arrays")
    if abs(np.linalg.norm(q) - 1.0) > _UNIT_TOL:
        raise DomainError("quaternion is not unit norm")
    return q / np.linalg.norm(q)


def quat_log(q):
    """Logarithmic map of a unit quaternion into R^3.

    Returns ``arccos(w) * u / |u|`` for vector part u, and the zero vector
    when the vector part vanishes.  The result lies in the closed ball of
    radius pi.
    """
    q = _check_unit(q)
    un = np.linalg.norm(q[1:])
    if un < 1e-12:
        return np.zeros(3)
    w = min(1.0, max(-1.0, q[0]))
    return np.arccos(w) * q[1:] / un


def quat_exp(w):
    """Exponential map from the open ball of radius pi onto unit quaternions."""
    w = np.asarray(w, dtype=float)
    if w.shape != (3,):
        raise DimensionMismatch("rotation vectors must be length-3 arrays")
    theta = np.linalg.norm(w)
    if not np.isfinite(theta):
        raise DomainError("nonfinite rotation vector")
    if theta >= np.pi:
        raise DomainError("rotation vector must have norm below pi")
    q = np.empty(4)
    q[0] = np.cos(theta)
    if theta < 1e-12:
        q[1:] = w  # sin(t)/t -> 1
    else:
        q[1:] = np.sin(theta) / theta * w
    return q


def quat_distance(q1, q2):
    """Geodesic distance on S^3: ``2 |Log(q1 * conj(q2))|``.

    Antipodal quaternions are at distance ``2 pi``; the distance is zero only
    for identical quaternions.  Note that q and -q encode the same rotation
    but are far apart under this metric, which is what keeps the sign
    bookkeeping of orientation trajectories honest.
    """
    r = quat_product(_check_unit(q1), quat_conjugate(_check_unit(q2)))
    if np.linalg.norm(r[1:]) < 1e-12 and r[0] < 0.0:
        return 2.0 * np.pi
    return 2.0 * np.linalg.norm(quat_log(r))


def quat_align(q, reference):
    """Flip the sign of q when that brings it closer to the reference."""
    q = np.asarray(q, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if float(q @ reference) < 0.0:
        return -q
    return q


def quat_from_axis_angle(axis, angle):
    """Unit quaternion rotating by ``angle`` around ``axis``."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n < 1e-12:
        raise DomainError("axis must be nonzero")
    half = 0.5 * float(angle)
    q = np.empty(4)
    q[0] = np.cos(half)
    q[1:] = np.sin(half) * axis / n
    return q


# ---------------------------------------------------------------------------
# rotation matrices
# ---------------------------------------------------------------------------

def skew(w):
    """Map a length-3 vector to the matrix [w]_x with [w]_x v = w x v."""
    w = np.asarray(w, dtype=float)
    if w.shape != (3,):
        raise DimensionMismatch("rotation vectors must be length-3 arrays")
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def _check_rotation(r):
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise DimensionMismatch("rotations must be 3x3 matrices")
    if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-6 or np.linalg.det(r) < 0.0:
        raise DomainError("matrix is not a rotation")
    return r


def rot_log(r):
    """Rotation vector (axis times angle) of a rotation matrix.

    The angle is taken in [0, pi); rotations by exactly pi sit on the cut
    locus where the axis sign is ambiguous and a DomainError is raised.
    """
    r = _check_rotation(r)
    c = min(1.0, max(-1.0, 0.5 * (np.trace(r) - 1.0)))
    theta = np.arccos(c)
    if theta < 1e-12:
        return np.zeros(3)
    if theta > np.pi - 1e-6:
        raise DomainError("rotation angle too close to pi for a unique axis")
    v = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    return theta / (2.0 * np.sin(theta)) * v


def rot_exp(w):
    """Rodrigues formula: rotation matrix for a rotation vector."""
    w = np.asarray(w, dtype=float)
    if w.shape != (3,):
        raise DimensionMismatch("rotation vectors must be length-3 arrays")
    theta = np.linalg.norm(w)
    if not np.isfinite(theta):
        raise DomainError("nonfinite rotation vector")
    k = skew(w)
    if theta < 1e-12:
        return np.eye(3) + k + 0.5 * (k @ k)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * k + b * (k @ k)


def rot_distance(r1, r2):
    """Angle of the relative rotation r1 r2^T."""
    r = _check_rotation(r1) @ _check_rotation(r2).T
    c = min(1.0, max(-1.0, 0.5 * (np.trace(r) - 1.0)))
    return float(np.arccos(c))


# ---------------------------------------------------------------------------
# symmetric positive definite matrices
# ---------------------------------------------------------------------------

def check_spd(x, tol=1e-9):
    """Return x as a float array, raising NotSpd unless it is SPD."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise NotSpd("SPD matrices must be square")
    if np.max(np.abs(x - x.T)) > tol * max(1.0, np.max(np.abs(x))):
        raise NotSpd("matrix is not symmetric")
    if np.min(np.linalg.eigvalsh(0.5 * (x + x.T))) <= 0.0:
        raise NotSpd("matrix has a nonpositive eigenvalue")
    return x


def _sym(x):
    return 0.5 * (x + x.T)


def _eig_apply(x, fn):
    # eigendecomposition route for matrix functions of symmetric matrices
    vals, vecs = np.linalg.eigh(_sym(x))
    return _sym((vecs * fn(vals)) @ vecs.T)


def spd_sqrt(x):
    return _eig_apply(check_spd(x), np.sqrt)


def spd_invsqrt(x):
    return _eig_apply(check_spd(x), lambda v: 1.0 / np.sqrt(v))


def spd_logm(x):
    return _eig_apply(check_spd(x), np.log)


def spd_expm(x):
    x = np.asarray(x, dtype=float)
    if np.max(np.abs(x - x.T)) > 1e-8 * max(1.0, np.max(np.abs(x))):
        raise DomainError("matrix exponential input must be symmetric")
    return _eig_apply(x, np.exp)


def spd_log(base, target):
    """Tangent vector at ``base`` pointing to ``target`` (affine-invariant map)."""
    b_sqrt = spd_sqrt(base)
    b_isqrt = spd_invsqrt(base)
    inner = spd_logm(b_isqrt @ check_spd(target) @ b_isqrt)
    return _sym(b_sqrt @ inner @ b_sqrt)


def spd_exp(base, tangent):
    """Follow the geodesic from ``base`` along a symmetric tangent vector."""
    b_sqrt = spd_sqrt(base)
    b_isqrt = spd_invsqrt(base)
    inner = spd_expm(b_isqrt @ np.asarray(tangent, dtype=float) @ b_isqrt)
    return _sym(b_sqrt @ inner @ b_sqrt)


def spd_transport(frm, to, tangent):
    """Parallel transport a tangent vector between SPD base points.

    Uses ``E = (to frm^-1)^(1/2)`` and maps ``D`` to ``E D E^T``, which
    preserves the affine-invariant inner product.
    """
    f_sqrt = spd_sqrt(frm)
    f_isqrt = spd_invsqrt(frm)
    middle = spd_sqrt(f_isqrt @ check_spd(to) @ f_isqrt)
    e = f_sqrt @ middle @ f_isqrt
    t = np.asarray(tangent, dtype=float)
    if t.shape != e.shape:
        raise DimensionMismatch("tangent shape does not match base points")
    return _sym(e @ t @ e.T)


def spd_distance(a, b):
    """Affine-invariant distance ``|logm(a^-1/2 b a^-1/2)|_F``."""
    a_isqrt = spd_invsqrt(a)
    return float(np.linalg.norm(spd_logm(a_isqrt @ check_spd(b) @ a_isqrt)))


def spd_geodesic(a, b, s):
    """Point a fraction ``s`` of the way from a to b along the geodesic."""
    return spd_exp(a, float(s) * spd_log(a, b))


def spd_inner(base, u, v):
    """Affine-invariant inner product of two tangent vectors at ``base``."""
    inv = np.linalg.inv(check_spd(base))
    return float(np.trace(inv @ np.asarray(u) @ inv @ np.asarray(v)))


# ---------------------------------------------------------------------------
# Mandel flattening of symmetric matrices
# ---------------------------------------------------------------------------

def mandel_vec(s):
    """Flatten a symmetric m x m matrix into m(m+1)/2 components.

    Diagonal entries come first, then the strict upper triangle in row-major
    order scaled by sqrt(2).  The scaling makes the Euclidean norm of the
    vector equal the Frobenius norm of the matrix.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionMismatch("input must be a square matrix")
    m = s.shape[0]
    if np.max(np.abs(s - s.T)) > 1e-8 * max(1.0, np.max(np.abs(s))):
        raise DomainError("input must be symmetric")
    iu = np.triu_indices(m, k=1)
    return np.concatenate([np.diag(s), np.sqrt(2.0) * s[iu]])


def mandel_mat(v):
    """Inverse of :func:`mandel_vec`."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch("input must be a vector")
    n = v.size
    m = int(round((np.sqrt(8.0 * n + 1.0) - 1.0) / 2.0))
    if m * (m + 1) != 2 * n:
        raise DimensionMismatch("length is not a triangular number")
    s = np.diag(v[:m]).astype(float)
    iu = np.triu_indices(m, k=1)
    s[iu] = v[m:] / np.sqrt(2.0)
    s[(iu[1], iu[0])] = v[m:] / np.sqrt(2.0)
    return s


def mandel_dim(m):
    """Length of the Mandel vector for an m x m symmetric matrix."""
    return m * (m + 1) // 2
