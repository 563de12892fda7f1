"""Compiled inner loop of the rejection-free chain.

Spins are stored flat in upper-triangle order. ``counts[f]`` is the sum of
the syndromes of the plaquettes containing spin ``f``, kept as an integer so
the flip energies never drift.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def rf_steps(
    spins,
    syndromes,
    counts,
    J_up,
    beta,
    gamma,
    spin_plaq,
    plaq_spins,
    uniforms,
    state,
    best_spins,
    burn_in,
    record_every,
    records,
    record_energies,
    n_recorded,
):
    """Advance the chain by ``len(uniforms)`` steps.

    ``state`` holds ``[energy, best_energy, step]`` as floats and is updated in
    place, as are the spin/syndrome/count arrays. Returns the new number of
    recorded readouts.
    """
    m = spins.shape[0]
    weights = np.empty(m)
    energy = state[0]
    best_energy = state[1]
    step = np.int64(state[2])
    cap = records.shape[0]
    for t in range(uniforms.shape[0]):
        total = 0.0
        for f in range(m):
            d = 2.0 * beta * J_up[f] * spins[f] + gamma * counts[f]
            w = 1.0 if d <= 0.0 else np.exp(-d)
            weights[f] = w
            total += w
        target = uniforms[t] * total
        acc = 0.0
        chosen = m - 1
        for f in range(m):
            acc += weights[f]
            if acc > target:
                chosen = f
                break
        d = 2.0 * beta * J_up[chosen] * spins[chosen] + gamma * counts[chosen]
        energy += d
        spins[chosen] = -spins[chosen]
        for q in range(spin_plaq.shape[1]):
            p = spin_plaq[chosen, q]
            if p < 0:
                break
            syndromes[p] = -syndromes[p]
            s_new = syndromes[p]
            for r in range(plaq_spins.shape[1]):
                g = plaq_spins[p, r]
                if g >= 0 and g != chosen:
                    counts[g] += 2 * s_new
        counts[chosen] = -counts[chosen]
        step += 1
        if energy < best_energy:
            best_energy = energy
            for f in range(m):
                best_spins[f] = spins[f]
        if step > burn_in and (step - burn_in) % record_every == 0 and n_recorded < cap:
            for f in range(m):
                records[n_recorded, f] = spins[f]
            record_energies[n_recorded] = energy
            n_recorded += 1
    state[0] = energy
    state[1] = best_energy
    state[2] = step
    return n_recorded
