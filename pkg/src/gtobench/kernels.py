"""Training inner loops over flat arrays.

Shared layout: matrices is (visits, 3, 2) float64, key_index maps each visit
to its regret-table row, hero tables are (keys, 3) and villain tables
(keys, 2). All randomness arrives as pre-drawn uniforms shaped
(iterations, visits, draws_per_visit); the kernels themselves are
deterministic, which keeps the jit and pure-Python backends bit-identical.
Regret matching is unrolled to scalars: jit-friendly and allocation-free.
"""
from __future__ import annotations

from .backend import jit_if_enabled


@jit_if_enabled
def cfr_pass(
    matrices,
    key_index,
    hero_regret,
    hero_strategy_sum,
    villain_regret,
    villain_strategy_sum,
    iters,
):
    """Full-expectation regret updates for both sides, iters passes."""
    n_visits = key_index.shape[0]
    for _t in range(iters):
        for v in range(n_visits):
            k = key_index[v]
            m00 = matrices[v, 0, 0]
            m01 = matrices[v, 0, 1]
            m10 = matrices[v, 1, 0]
            m11 = matrices[v, 1, 1]
            m20 = matrices[v, 2, 0]
            m21 = matrices[v, 2, 1]

            p0 = hero_regret[k, 0] if hero_regret[k, 0] > 0.0 else 0.0
            p1 = hero_regret[k, 1] if hero_regret[k, 1] > 0.0 else 0.0
            p2 = hero_regret[k, 2] if hero_regret[k, 2] > 0.0 else 0.0
            tot = p0 + p1 + p2
            if tot > 0.0:
                sh0 = p0 / tot
                sh1 = p1 / tot
                sh2 = p2 / tot
            else:
                sh0 = 1.0 / 3.0
                sh1 = 1.0 / 3.0
                sh2 = 1.0 / 3.0

            q0 = villain_regret[k, 0] if villain_regret[k, 0] > 0.0 else 0.0
            q1 = villain_regret[k, 1] if villain_regret[k, 1] > 0.0 else 0.0
            qtot = q0 + q1
            if qtot > 0.0:
                sv0 = q0 / qtot
                sv1 = q1 / qtot
            else:
                sv0 = 0.5
                sv1 = 0.5

            u0 = m00 * sv0 + m01 * sv1
            u1 = m10 * sv0 + m11 * sv1
            u2 = m20 * sv0 + m21 * sv1
            ev_h = sh0 * u0 + sh1 * u1 + sh2 * u2

            w0 = -(sh0 * m00 + sh1 * m10 + sh2 * m20)
            w1 = -(sh0 * m01 + sh1 * m11 + sh2 * m21)
            ev_v = sv0 * w0 + sv1 * w1

            hero_regret[k, 0] += u0 - ev_h
            hero_regret[k, 1] += u1 - ev_h
            hero_regret[k, 2] += u2 - ev_h
            hero_strategy_sum[k, 0] += sh0
            hero_strategy_sum[k, 1] += sh1
            hero_strategy_sum[k, 2] += sh2

            villain_regret[k, 0] += w0 - ev_v
            villain_regret[k, 1] += w1 - ev_v
            villain_strategy_sum[k, 0] += sv0
            villain_strategy_sum[k, 1] += sv1


@jit_if_enabled
def mccfr_pass(
    matrices,
    key_index,
    hero_regret,
    hero_strategy_sum,
    villain_regret,
    villain_strategy_sum,
    uniforms,
):
    """Sampled-opponent regret updates; uniforms is (iters, visits, 2).

    Per visit, one villain column is drawn from the villain's current
    strategy and hero's counterfactual values are read off that single
    column; the villain is updated symmetrically from one hero row drawn
    from hero's current strategy. Sampling from the acting side's own
    strategy makes each update exactly unbiased for the cfr_pass one: the
    sampling weights coincide with the averaging weights, so the importance
    ratio is one and no exploration floor is needed.
    """
    n_iters = uniforms.shape[0]
    n_visits = key_index.shape[0]
    for t in range(n_iters):
        for v in range(n_visits):
            k = key_index[v]

            p0 = hero_regret[k, 0] if hero_regret[k, 0] > 0.0 else 0.0
            p1 = hero_regret[k, 1] if hero_regret[k, 1] > 0.0 else 0.0
            p2 = hero_regret[k, 2] if hero_regret[k, 2] > 0.0 else 0.0
            tot = p0 + p1 + p2
            if tot > 0.0:
                sh0 = p0 / tot
                sh1 = p1 / tot
                sh2 = p2 / tot
            else:
                sh0 = 1.0 / 3.0
                sh1 = 1.0 / 3.0
                sh2 = 1.0 / 3.0

            q0 = villain_regret[k, 0] if villain_regret[k, 0] > 0.0 else 0.0
            q1 = villain_regret[k, 1] if villain_regret[k, 1] > 0.0 else 0.0
            qtot = q0 + q1
            if qtot > 0.0:
                sv0 = q0 / qtot
                sv1 = q1 / qtot
            else:
                sv0 = 0.5
                sv1 = 0.5

            j = 0 if uniforms[t, v, 0] < sv0 else 1
            u_row = uniforms[t, v, 1]
            if u_row < sh0:
                i = 0
            elif u_row < sh0 + sh1:
                i = 1
            else:
                i = 2

            c0 = matrices[v, 0, j]
            c1 = matrices[v, 1, j]
            c2 = matrices[v, 2, j]
            ev_h = sh0 * c0 + sh1 * c1 + sh2 * c2
            hero_regret[k, 0] += c0 - ev_h
            hero_regret[k, 1] += c1 - ev_h
            hero_regret[k, 2] += c2 - ev_h

            r0 = -matrices[v, i, 0]
            r1 = -matrices[v, i, 1]
            ev_v = sv0 * r0 + sv1 * r1
            villain_regret[k, 0] += r0 - ev_v
            villain_regret[k, 1] += r1 - ev_v

            hero_strategy_sum[k, 0] += sh0
            hero_strategy_sum[k, 1] += sh1
            hero_strategy_sum[k, 2] += sh2
            villain_strategy_sum[k, 0] += sv0
            villain_strategy_sum[k, 1] += sv1


@jit_if_enabled
def nfsp_pass(
    matrices,
    key_index,
    hero_q,
    hero_counts,
    villain_q,
    villain_counts,
    uniforms,
    anticipatory,
    rl_lr,
    eps_start,
    eps_end,
    t0,
    total_iters,
):
    """Fictitious self-play with tabular action values.

    uniforms is (iters, visits, 4): hero branch pick, hero action, villain
    branch pick, villain action. Action counts grow only on the best-response
    branch; the average policy is their normalization. Exploration decays
    linearly from eps_start at step 0 to eps_end at step total_iters - 1;
    t0 offsets the schedule so passes can run in chunks.
    """
    n_iters = uniforms.shape[0]
    n_visits = key_index.shape[0]
    horizon = total_iters - 1 if total_iters > 1 else 1
    for t in range(n_iters):
        frac = (t0 + t) / horizon
        if frac > 1.0:
            frac = 1.0
        eps = eps_start + (eps_end - eps_start) * frac
        for v in range(n_visits):
            k = key_index[v]

            u_mode_h = uniforms[t, v, 0]
            u_act_h = uniforms[t, v, 1]
            if u_mode_h < anticipatory:
                if u_act_h < eps:
                    i = int(u_act_h / eps * 3.0)
                    if i > 2:
                        i = 2
                else:
                    i = 0
                    if hero_q[k, 1] > hero_q[k, i]:
                        i = 1
                    if hero_q[k, 2] > hero_q[k, i]:
                        i = 2
                hero_counts[k, i] += 1.0
            else:
                c0 = hero_counts[k, 0]
                c1 = hero_counts[k, 1]
                ctot = c0 + c1 + hero_counts[k, 2]
                if ctot > 0.0:
                    if u_act_h < c0 / ctot:
                        i = 0
                    elif u_act_h < (c0 + c1) / ctot:
                        i = 1
                    else:
                        i = 2
                else:
                    i = int(u_act_h * 3.0)
                    if i > 2:
                        i = 2

            u_mode_v = uniforms[t, v, 2]
            u_act_v = uniforms[t, v, 3]
            if u_mode_v < anticipatory:
                if u_act_v < eps:
                    j = int(u_act_v / eps * 2.0)
                    if j > 1:
                        j = 1
                else:
                    j = 0 if villain_q[k, 0] >= villain_q[k, 1] else 1
                villain_counts[k, j] += 1.0
            else:
                d0 = villain_counts[k, 0]
                dtot = d0 + villain_counts[k, 1]
                if dtot > 0.0:
                    j = 0 if u_act_v < d0 / dtot else 1
                else:
                    j = 0 if u_act_v < 0.5 else 1

            payoff = matrices[v, i, j]
            hero_q[k, i] += rl_lr * (payoff - hero_q[k, i])
            villain_q[k, j] += rl_lr * (-payoff - villain_q[k, j])
