"""JIT-compiled inner loops for the planner.

The descent loop evaluates the objective and its control gradient a hundred
times per replanning step on arrays with a few dozen elements, where numpy
call overhead dominates arithmetic. These two functions carry that load as
plain scalar loops under numba. They must agree with the numpy reference
path in planner/costs (a property test enforces this); any change here
needs the same change there.

Road geometry travels as a flat vector: (lane0, lane1, lane2, lane_width,
road_half_width, bump_lon_radius, bump_lat_radius, offroad_band).
"""

from __future__ import annotations

import numpy as np
from numba import njit

_BUMP_EDGE = 1e-9


def road_vector(road) -> np.ndarray:
    c = road.lane_centers
    return np.array(
        [
            c[0], c[1], c[2],
            road.lane_width,
            road.road_half_width,
            road.bump_lon_radius,
            road.bump_lat_radius,
            road.offroad_band,
        ]
    )


@njit(cache=True)
def forward(x0, U, dt, friction):
    """Euler rollout of every control batch from one shared start state."""
    B, K = U.shape[0], U.shape[1]
    X = np.empty((B, K + 1, 4))
    for b in range(B):
        X[b, 0, 0] = x0[0]
        X[b, 0, 1] = x0[1]
        X[b, 0, 2] = x0[2]
        X[b, 0, 3] = x0[3]
        for i in range(K):
            lat, lon, head, spd = X[b, i, 0], X[b, i, 1], X[b, i, 2], X[b, i, 3]
            X[b, i + 1, 0] = lat + dt * spd * np.sin(head)
            X[b, i + 1, 1] = lon + dt * spd * np.cos(head)
            X[b, i + 1, 2] = head + dt * spd * U[b, i, 0]
            X[b, i + 1, 3] = spd + dt * (U[b, i, 1] - friction * spd)
    return X


@njit(cache=True)
def cost_and_grad(theta_w, X, U, hum_lat, hum_lon, probs, road_vec, v_target, dt, friction, term_values, term_grads):
    """Objective (B,) and control gradient (B, K, 2) for precomputed states.

    Costs are summed over states X[:, 0..K-1] paired with controls; the
    supplied terminal values/gradients (zero when unused) are added at
    X[:, K] and seed the reverse pass.
    """
    B, K = U.shape[0], U.shape[1]
    n_hyp, n_hum = hum_lat.shape[0], hum_lat.shape[1]
    lane_w = road_vec[3]
    half_w = road_vec[4]
    r_lon = road_vec[5]
    r_lat = road_vec[6]
    band = road_vec[7]

    J = np.empty(B)
    grad = np.empty((B, K, 2))
    g_lat = np.empty(K)
    g_lon = np.empty(K)
    g_spd = np.empty(K)
    clear = np.empty(n_hum)
    db_dlat = np.empty(n_hum)
    db_dlon = np.empty(n_hum)

    for b in range(B):
        total = term_values[b]
        for i in range(K):
            lat = X[b, i, 0]
            lon = X[b, i, 1]
            spd = X[b, i, 3]

            spd_err = spd - v_target
            c = theta_w[0] * spd_err * spd_err
            gl = 0.0
            gn = 0.0
            gs = theta_w[0] * 2.0 * spd_err

            # off-road smoothstep
            a = abs(lat)
            z = (a - half_w) / band
            if z > 0.0:
                if z >= 1.0:
                    c += theta_w[2]
                else:
                    c += theta_w[2] * z * z * (3.0 - 2.0 * z)
                    slope = theta_w[2] * 6.0 * z * (1.0 - z) / band
                    gl += slope if lat > 0.0 else -slope

            # lane offsets, in lane widths
            nearest = np.inf
            nearest_d = 0.0
            for j in range(3):
                d = (lat - road_vec[j]) / lane_w
                sq = d * d
                if sq < nearest:
                    nearest = sq
                    nearest_d = d
                c += theta_w[4 + j] * sq
                gl += theta_w[4 + j] * 2.0 * d / lane_w
            c += theta_w[3] * nearest
            gl += theta_w[3] * 2.0 * nearest_d / lane_w

            # collision bump, averaged over hypotheses
            if n_hyp > 0 and n_hum > 0:
                f2 = 0.0
                f2_glat = 0.0
                f2_glon = 0.0
                for h in range(n_hyp):
                    keep = 1.0
                    for m in range(n_hum):
                        dl = (lat - hum_lat[h, m, i]) / r_lat
                        dn = (lon - hum_lon[h, m, i]) / r_lon
                        q = dl * dl + dn * dn
                        if q < 1.0:
                            qs = q if q < 1.0 - _BUMP_EDGE else 1.0 - _BUMP_EDGE
                            denom = 1.0 - qs
                            bump = np.exp(1.0 - 1.0 / denom)
                            db_dq = -bump / (denom * denom)
                            clear[m] = 1.0 - bump
                            db_dlat[m] = db_dq * 2.0 * dl / r_lat
                            db_dlon[m] = db_dq * 2.0 * dn / r_lon
                        else:
                            clear[m] = 1.0
                            db_dlat[m] = 0.0
                            db_dlon[m] = 0.0
                    prod_all = 1.0
                    for m in range(n_hum):
                        prod_all *= clear[m]
                    hl = 0.0
                    hn = 0.0
                    for m in range(n_hum):
                        loo = 1.0
                        for m2 in range(n_hum):
                            if m2 != m:
                                loo *= clear[m2]
                        hl += loo * db_dlat[m]
                        hn += loo * db_dlon[m]
                    f2 += probs[h] * (1.0 - prod_all)
                    f2_glat += probs[h] * hl
                    f2_glon += probs[h] * hn
                c += theta_w[1] * f2
                gl += theta_w[1] * f2_glat
                gn += theta_w[1] * f2_glon

            total += c
            g_lat[i] = gl
            g_lon[i] = gn
            g_spd[i] = gs
        J[b] = total

        # reverse pass through the dynamics chain
        l_lat = term_grads[b, 0]
        l_lon = term_grads[b, 1]
        l_head = term_grads[b, 2]
        l_spd = term_grads[b, 3]
        for i in range(K - 1, -1, -1):
            head = X[b, i, 2]
            spd = X[b, i, 3]
            grad[b, i, 0] = dt * spd * l_head
            grad[b, i, 1] = dt * l_spd
            sin_h = np.sin(head)
            cos_h = np.cos(head)
            new_lat = l_lat + g_lat[i]
            new_lon = l_lon + g_lon[i]
            new_head = dt * spd * (cos_h * l_lat - sin_h * l_lon) + l_head
            new_spd = (
                dt * (sin_h * l_lat + cos_h * l_lon)
                + dt * U[b, i, 0] * l_head
                + (1.0 - dt * friction) * l_spd
                + g_spd[i]
            )
            l_lat, l_lon, l_head, l_spd = new_lat, new_lon, new_head, new_spd

    return J, grad
