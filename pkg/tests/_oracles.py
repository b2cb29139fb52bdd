"""Independent brute-force implementations used only as test oracles.

Everything here works on plain 4x4 homogeneous matrices with numpy linear
algebra, deliberately avoiding the quaternion code paths under test.
"""

import heapq
import math

import numpy as np


def mat_from_quat_t(qw, qx, qy, qz, t):
    """4x4 homogeneous matrix from a unit quaternion and translation."""
    n = math.sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
    qw, qx, qy, qz = qw / n, qx / n, qy / n, qz / n
    T = np.eye(4)
    T[0, 0] = 1 - 2 * qy * qy - 2 * qz * qz
    T[0, 1] = 2 * qx * qy - 2 * qz * qw
    T[0, 2] = 2 * qx * qz + 2 * qy * qw
    T[1, 0] = 2 * qx * qy + 2 * qz * qw
    T[1, 1] = 1 - 2 * qx * qx - 2 * qz * qz
    T[1, 2] = 2 * qy * qz - 2 * qx * qw
    T[2, 0] = 2 * qx * qz - 2 * qy * qw
    T[2, 1] = 2 * qy * qz + 2 * qx * qw
    T[2, 2] = 1 - 2 * qx * qx - 2 * qy * qy
    T[:3, 3] = t
    return T


def mat_from_pose(pose):
    qw, qx, qy, qz = pose.rotation
    return mat_from_quat_t(qw, qx, qy, qz, pose.translation)


def mat_rotation_angle(T):
    tr = np.trace(T[:3, :3])
    return math.acos(min(1.0, max(-1.0, (tr - 1.0) / 2.0)))


def random_pose_matrix(rng, trans_scale=1.0):
    """Uniform random rotation (QR of a Gaussian) plus Gaussian translation."""
    A = rng.normal(size=(3, 3))
    Q, R = np.linalg.qr(A)
    Q = Q @ np.diag(np.sign(np.diag(R)))
    if np.linalg.det(Q) < 0:
        Q[:, 2] = -Q[:, 2]
    T = np.eye(4)
    T[:3, :3] = Q
    T[:3, 3] = rng.normal(scale=trans_scale, size=3)
    return T


def rpe_samples_matrix(gt_mats, est_mats, delta, canonical=True):
    """Eq.-style relative error straight on homogeneous matrices."""
    m = len(gt_mats) - delta
    out = []
    for i in range(m):
        q_rel = np.linalg.inv(gt_mats[i]) @ gt_mats[i + delta]
        p_rel = np.linalg.inv(est_mats[i]) @ est_mats[i + delta]
        E = (np.linalg.inv(q_rel) @ p_rel) if canonical else (q_rel @ p_rel)
        out.append((float(np.linalg.norm(E[:3, 3])),
                    math.degrees(mat_rotation_angle(E))))
    return out


def ate_samples_matrix(gt_mats, est_mats, S_mat):
    out = []
    for Q, P in zip(gt_mats, est_mats):
        F = np.linalg.inv(Q) @ S_mat @ P
        out.append(float(np.linalg.norm(F[:3, 3])))
    return out


def dijkstra_grid_cost(occ, start, goal, resolution, occupied_threshold):
    """Uniform-cost search over the 8-connected grid; returns cost or None.

    occ is a (rows, cols) occupancy array; cells are (col, row).
    """
    rows, cols = occ.shape
    moves = [(1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
             (1, 1, math.sqrt(2)), (1, -1, math.sqrt(2)),
             (-1, 1, math.sqrt(2)), (-1, -1, math.sqrt(2))]
    dist = {start: 0.0}
    pq = [(0.0, start)]
    while pq:
        d, cell = heapq.heappop(pq)
        if cell == goal:
            return d * resolution
        if d > dist.get(cell, math.inf):
            continue
        c, r = cell
        for dc, dr, w in moves:
            nc, nr = c + dc, r + dr
            if not (0 <= nc < cols and 0 <= nr < rows):
                continue
            if occ[nr, nc] >= occupied_threshold:
                continue
            nd = d + w
            if nd < dist.get((nc, nr), math.inf):
                dist[(nc, nr)] = nd
                heapq.heappush(pq, (nd, (nc, nr)))
    return None


def monotone_match_dp(a, b, max_diff):
    """Max-cardinality, then min-cost, monotone matching of two sorted lists.

    O(n*m) dynamic program; independent of the production greedy matcher.
    Returns the list of (i, j) pairs.
    """
    n, m = len(a), len(b)
    NEG = (-1, 0.0)
    best = [[None] * (m + 1) for _ in range(n + 1)]
    for j in range(m + 1):
        best[0][j] = (0, 0.0)
    for i in range(1, n + 1):
        best[i][0] = (0, 0.0)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cand = max(best[i - 1][j], best[i][j - 1],
                       key=lambda s: (s[0], -s[1]))
            diff = abs(a[i - 1] - b[j - 1])
            if diff <= max_diff:
                took = (best[i - 1][j - 1][0] + 1, best[i - 1][j - 1][1] + diff)
                if (took[0], -took[1]) > (cand[0], -cand[1]):
                    cand = took
            best[i][j] = cand
    # backtrack
    pairs = []
    i, j = n, m
    while i > 0 and j > 0:
        cur = best[i][j]
        if best[i - 1][j] == cur:
            i -= 1
        elif best[i][j - 1] == cur:
            j -= 1
        else:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
    pairs.reverse()
    return pairs
