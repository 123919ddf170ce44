"""Trajectory integration kernels.

Everything here is written in numba-compatible numpy style and wrapped
with :func:`cryoloop._accel.maybe_njit`; the pure-numpy backend runs the
same functions uncompiled with identical random streams.

Random-stream contract for :func:`coupled_trajectory` (fixed so results
are reproducible and backend independent):

1. vacuum sampling, if requested: 4 normals (Re a, Im a, Re b, Im b);
2. dynamic qubit: one uniform for the initial jump threshold R;
3. per step with noise on: 4 normals (Re xi_a, Im xi_a, Re xi_b, Im xi_b);
4. one uniform at every projection event (drawn even when the collapse is
   trivial, keeping the stream state independent);
5. one uniform after every jump (fresh R).

Field update: Euler-Maruyama with controls sampled at the left endpoint
of the step.  Qubit update: exact 2x2 propagator of the non-Hermitian
step Hamiltonian (piecewise-constant over dt), so the norm - the jump
clock - carries no discretization error even over multi-microsecond runs.
"""

import numpy as np

from ._accel import maybe_njit
from .schedule import (AD_ABS0, AD_ABS1, AD_ARG0, AD_ARG1, DA0, DA1, DB0,
                       DB1, AIN_RE0, AIN_RE1, AIN_IM0, AIN_IM1, AP_RE0,
                       AP_RE1, AP_IM0, AP_IM1, OM_RE0, OM_RE1, OM_IM0,
                       OM_IM1)

STATUS_OK = 0
STATUS_BLOWUP = 1
STATUS_TRUNCATION = 2

#: layout of the out_final vector of coupled_trajectory
FINAL_LEN = 10
(F_ALPHA_RE, F_ALPHA_IM, F_BETA_RE, F_BETA_IM, F_C0_RE, F_C0_IM,
 F_C1_RE, F_C1_IM, F_JUMPS, F_FAIL_T) = range(FINAL_LEN)


@maybe_njit(cache=True, nogil=True)
def qubit_propagator_step(c0, c1, delta, om, gamma, dt):
    """Advance (c0, c1) by exp(-i H_eff dt).

    H_eff = (delta/2) sigma_z + om sigma_+ + om* sigma_- - i(gamma/2)|1><1|
    with sigma_z|1> = +|1>.  Traceless split: H_eff = (tr/2) I + M with
    M^2 = (m^2 + |om|^2) I, m = -delta/2 + i gamma/4, giving the closed
    form exp(-iM dt) = cos(w dt) I - i sin(w dt)/w M.
    """
    if om == 0j:
        c0n = c0 * np.exp(0.5j * delta * dt)
        c1n = c1 * np.exp((-0.5j * delta - 0.5 * gamma) * dt)
        return c0n, c1n
    m = -0.5 * delta + 0.25j * gamma
    w = np.sqrt(m * m + (om.real * om.real + om.imag * om.imag) + 0j)
    ph = np.exp(-0.25 * gamma * dt)  # exp(-i tr/2 dt), tr/2 = -i gamma/4
    if abs(w) * dt < 1e-12:
        cw = 1.0 + 0j
        sw = dt + 0j
    else:
        cw = np.cos(w * dt)
        sw = np.sin(w * dt) / w
    u00 = ph * (cw - 1j * sw * m)
    u11 = ph * (cw + 1j * sw * m)
    u01 = ph * (-1j * sw * np.conj(om))
    u10 = ph * (-1j * sw * om)
    return u00 * c0 + u01 * c1, u10 * c0 + u11 * c1


@maybe_njit(cache=True, nogil=True)
def coupled_trajectory(rng, seg_t0, seg_t1, ctrl, proj_times,
                       K, kappa_a, kappa_d, kappa_b, kappa_p,
                       chi, gamma, n_bar, theta_a, theta_b,
                       chi_corr, n_crit,
                       dt, n_steps, rec_stride,
                       sz_mode, noise_on, sample_vacuum,
                       init_alpha, init_beta, init_c0, init_c1,
                       out_t, out_sz, out_na, out_nb, out_final):
    """One trajectory of the coupled Kerr + cavity + qubit system.

    sz_mode: 0 evolves the qubit; +1/-1 pins <sigma_z> (field-only runs).
    Returns STATUS_OK or STATUS_BLOWUP (with the failure time recorded in
    out_final[F_FAIL_T]); recorded samples land every ``rec_stride`` steps
    plus one final sample.
    """
    al = init_alpha
    be = init_beta
    if sample_vacuum == 1:
        al = 0.5 * (rng.normal(0.0, 1.0) + 1j * rng.normal(0.0, 1.0))
        be = 0.5 * (rng.normal(0.0, 1.0) + 1j * rng.normal(0.0, 1.0))
    c0 = init_c0
    c1 = init_c1
    r_threshold = 0.0
    if sz_mode == 0:
        r_threshold = rng.random()

    sqrt_ab = np.sqrt(kappa_a * kappa_b)
    cpl_ba = np.exp(1j * (theta_b - theta_a))   # beta driving alpha
    cpl_ab = np.exp(1j * (theta_a - theta_b))   # alpha driving beta
    in_a = np.sqrt(kappa_a) * np.exp(-1j * theta_a)
    in_b = np.sqrt(kappa_b) * np.exp(-1j * theta_b)
    sqrt_kd = np.sqrt(kappa_d)
    sqrt_kp = np.sqrt(kappa_p)
    half_ka = 0.5 * (kappa_a + kappa_d)
    half_kb = 0.5 * (kappa_b + kappa_p)
    sig_a = np.sqrt(0.5 * (kappa_a + kappa_d) * (n_bar + 0.5))
    sig_b = np.sqrt(0.5 * (kappa_b + kappa_p) * (n_bar + 0.5))
    sqdt = np.sqrt(dt)

    jumps = 0.0
    seg = 0
    nseg = seg_t1.shape[0]
    pj = 0
    nproj = proj_times.shape[0]
    rec = 0
    status = STATUS_OK
    t = 0.0

    for i in range(n_steps):
        t = i * dt
        na = al.real * al.real + al.imag * al.imag
        nb = be.real * be.real + be.imag * be.imag
        norm2 = (c0.real * c0.real + c0.imag * c0.imag
                 + c1.real * c1.real + c1.imag * c1.imag)
        if sz_mode == 0:
            sz = (c1.real * c1.real + c1.imag * c1.imag
                  - c0.real * c0.real - c0.imag * c0.imag) / norm2
        else:
            sz = float(sz_mode)

        if i % rec_stride == 0:
            if not (np.isfinite(na) and np.isfinite(nb) and np.isfinite(norm2)):
                status = STATUS_BLOWUP
                out_final[F_FAIL_T] = t
                break
            out_t[rec] = t
            out_sz[rec] = sz
            out_na[rec] = na
            out_nb[rec] = nb
            rec += 1

        # projective collapse at the end of a measurement window
        if pj < nproj and t >= proj_times[pj]:
            u = rng.random()
            if sz_mode == 0:
                p1 = (c1.real * c1.real + c1.imag * c1.imag) / norm2
                if u < p1:
                    c0 = 0j
                    c1 = 1.0 + 0j
                else:
                    c0 = 1.0 + 0j
                    c1 = 0j
                r_threshold = rng.random()
            pj += 1

        # piecewise controls, left endpoint of the step
        while t >= seg_t1[seg] and seg < nseg - 1:
            seg += 1
        frac = (t - seg_t0[seg]) / (seg_t1[seg] - seg_t0[seg])
        if frac < 0.0:
            frac = 0.0
        elif frac > 1.0:
            frac = 1.0
        row = ctrl[seg]
        mag = row[AD_ABS0] + (row[AD_ABS1] - row[AD_ABS0]) * frac
        arg = row[AD_ARG0] + (row[AD_ARG1] - row[AD_ARG0]) * frac
        alpha_d = mag * np.exp(1j * arg)
        delta_a = row[DA0] + (row[DA1] - row[DA0]) * frac
        delta_b = row[DB0] + (row[DB1] - row[DB0]) * frac
        alpha_in = (row[AIN_RE0] + (row[AIN_RE1] - row[AIN_RE0]) * frac
                    + 1j * (row[AIN_IM0] + (row[AIN_IM1] - row[AIN_IM0]) * frac))
        alpha_p = (row[AP_RE0] + (row[AP_RE1] - row[AP_RE0]) * frac
                   + 1j * (row[AP_IM0] + (row[AP_IM1] - row[AP_IM0]) * frac))
        om = (row[OM_RE0] + (row[OM_RE1] - row[OM_RE0]) * frac
              + 1j * (row[OM_IM0] + (row[OM_IM1] - row[OM_IM0]) * frac))

        # field drift, Euler-Maruyama
        dal = (-1j * delta_a * al - 1j * K * na * al - half_ka * al
               + sqrt_ab * be * cpl_ba - in_a * alpha_in - sqrt_kd * alpha_d)
        dbe = (-1j * delta_b * be - 1j * chi * sz * be - half_kb * be
               + sqrt_ab * al * cpl_ab - in_b * alpha_in - sqrt_kp * alpha_p)
        al = al + dal * dt
        be = be + dbe * dt
        if noise_on == 1:
            al = al + sig_a * (rng.normal(0.0, 1.0)
                               + 1j * rng.normal(0.0, 1.0)) * sqdt
            be = be + sig_b * (rng.normal(0.0, 1.0)
                               + 1j * rng.normal(0.0, 1.0)) * sqdt

        if sz_mode == 0:
            # Stark shift from the physical (normal-ordered) photon number;
            # nb here is the Wigner modulus sampled at the step start
            nb_phys = nb - 0.5
            chi_eff = chi
            if chi_corr == 1 and nb_phys > 0.0:
                chi_eff = chi / (1.0 + nb_phys / (2.0 * n_crit))
            delta_q = 2.0 * chi_eff * nb_phys
            c0, c1 = qubit_propagator_step(c0, c1, delta_q, om, gamma, dt)
            n2 = (c0.real * c0.real + c0.imag * c0.imag
                  + c1.real * c1.real + c1.imag * c1.imag)
            if n2 < r_threshold:
                c0 = 1.0 + 0j
                c1 = 0j
                r_threshold = rng.random()
                jumps += 1.0

    if status == STATUS_OK:
        t = n_steps * dt
        na = al.real * al.real + al.imag * al.imag
        nb = be.real * be.real + be.imag * be.imag
        norm2 = (c0.real * c0.real + c0.imag * c0.imag
                 + c1.real * c1.real + c1.imag * c1.imag)
        if not (np.isfinite(na) and np.isfinite(nb) and np.isfinite(norm2)):
            status = STATUS_BLOWUP
            out_final[F_FAIL_T] = t
        else:
            if sz_mode == 0:
                sz = (c1.real * c1.real + c1.imag * c1.imag
                      - c0.real * c0.real - c0.imag * c0.imag) / norm2
            else:
                sz = float(sz_mode)
            out_t[rec] = t
            out_sz[rec] = sz
            out_na[rec] = na
            out_nb[rec] = nb
            rec += 1

    out_final[F_ALPHA_RE] = al.real
    out_final[F_ALPHA_IM] = al.imag
    out_final[F_BETA_RE] = be.real
    out_final[F_BETA_IM] = be.imag
    out_final[F_C0_RE] = c0.real
    out_final[F_C0_IM] = c0.imag
    out_final[F_C1_RE] = c1.real
    out_final[F_C1_IM] = c1.imag
    out_final[F_JUMPS] = jumps
    return status


@maybe_njit(cache=True, nogil=True)
def _fock_rhs(psi, out, delta, half_K, drive_re, drive_im, half_kappa, dim):
    """out = -i H psi - (kappa/2) a^dag a psi  (matrix-free, tridiagonal).

    H = delta a^dag a + (K/2)(a^dag a)^2 + i(D a^dag - D* a), so the
    number-basis action is diagonal phases plus ladder couplings
    sqrt(n), sqrt(n+1).
    """
    D = drive_re + 1j * drive_im
    Dc = drive_re - 1j * drive_im
    for n in range(dim):
        val = (-1j * (delta * n + half_K * n * n) - half_kappa * n) * psi[n]
        if n > 0:
            val += D * np.sqrt(float(n)) * psi[n - 1]
        if n < dim - 1:
            val -= Dc * np.sqrt(float(n + 1)) * psi[n + 1]
        out[n] = val


@maybe_njit(cache=True, nogil=True)
def fock_trajectory(rng, seg_t0, seg_t1, ctrl,
                    K, kappa_a, kappa_d, dt, n_steps, rec_stride,
                    dim, tail_start, tail_budget,
                    out_t, out_n, out_final):
    """Monte-Carlo wavefunction trajectory of the isolated Kerr resonator.

    Reads only the drive (alpha_d) and delta_a channels of the compiled
    schedule.  Deterministic segments integrate with classical RK4 on the
    amplitude vector; the norm-threshold jump applies the annihilation
    operator and renormalizes.  Population above ``tail_start`` exceeding
    ``tail_budget`` (relative) aborts with STATUS_TRUNCATION.

    out_final: [<n>, norm^2, jumps, fail_t].
    """
    psi = np.zeros(dim, dtype=np.complex128)
    psi[0] = 1.0 + 0j
    k1 = np.empty(dim, dtype=np.complex128)
    k2 = np.empty(dim, dtype=np.complex128)
    k3 = np.empty(dim, dtype=np.complex128)
    k4 = np.empty(dim, dtype=np.complex128)
    tmp = np.empty(dim, dtype=np.complex128)
    r_threshold = rng.random()

    half_K = 0.5 * K
    half_kappa = 0.5 * (kappa_a + kappa_d)
    sqrt_kd = np.sqrt(kappa_d)
    jumps = 0.0
    seg = 0
    nseg = seg_t1.shape[0]
    rec = 0
    status = STATUS_OK

    for i in range(n_steps):
        t = i * dt
        while t >= seg_t1[seg] and seg < nseg - 1:
            seg += 1
        t0s = seg_t0[seg]
        dts = seg_t1[seg] - t0s
        row = ctrl[seg]

        if i % rec_stride == 0:
            norm2 = 0.0
            nbar = 0.0
            tail = 0.0
            for n in range(dim):
                p = psi[n].real * psi[n].real + psi[n].imag * psi[n].imag
                norm2 += p
                nbar += n * p
                if n >= tail_start:
                    tail += p
            if not np.isfinite(norm2) or norm2 <= 0.0:
                status = STATUS_BLOWUP
                out_final[3] = t
                break
            if tail / norm2 > tail_budget:
                status = STATUS_TRUNCATION
                out_final[3] = t
                break
            out_t[rec] = t
            out_n[rec] = nbar / norm2
            rec += 1

        # RK4 stages with controls at the exact substage times
        for stage in range(4):
            ts = t + (0.0, 0.5, 0.5, 1.0)[stage] * dt
            frac = (ts - t0s) / dts
            if frac < 0.0:
                frac = 0.0
            elif frac > 1.0:
                frac = 1.0
            mag = row[AD_ABS0] + (row[AD_ABS1] - row[AD_ABS0]) * frac
            arg = row[AD_ARG0] + (row[AD_ARG1] - row[AD_ARG0]) * frac
            delta = row[DA0] + (row[DA1] - row[DA0]) * frac
            drive = sqrt_kd * mag * np.exp(1j * arg)
            if stage == 0:
                _fock_rhs(psi, k1, delta, half_K, drive.real, drive.imag,
                          half_kappa, dim)
                for n in range(dim):
                    tmp[n] = psi[n] + 0.5 * dt * k1[n]
            elif stage == 1:
                _fock_rhs(tmp, k2, delta, half_K, drive.real, drive.imag,
                          half_kappa, dim)
                for n in range(dim):
                    tmp[n] = psi[n] + 0.5 * dt * k2[n]
            elif stage == 2:
                _fock_rhs(tmp, k3, delta, half_K, drive.real, drive.imag,
                          half_kappa, dim)
                for n in range(dim):
                    tmp[n] = psi[n] + dt * k3[n]
            else:
                _fock_rhs(tmp, k4, delta, half_K, drive.real, drive.imag,
                          half_kappa, dim)

        norm2 = 0.0
        for n in range(dim):
            psi[n] = psi[n] + (dt / 6.0) * (k1[n] + 2.0 * k2[n]
                                            + 2.0 * k3[n] + k4[n])
            norm2 += psi[n].real * psi[n].real + psi[n].imag * psi[n].imag

        if norm2 < r_threshold:
            s = 0.0
            for n in range(dim - 1):
                psi[n] = np.sqrt(float(n + 1)) * psi[n + 1]
                s += psi[n].real * psi[n].real + psi[n].imag * psi[n].imag
            psi[dim - 1] = 0j
            s = np.sqrt(s)
            for n in range(dim):
                psi[n] = psi[n] / s
            r_threshold = rng.random()
            jumps += 1.0

    if status == STATUS_OK:
        norm2 = 0.0
        nbar = 0.0
        for n in range(dim):
            p = psi[n].real * psi[n].real + psi[n].imag * psi[n].imag
            norm2 += p
            nbar += n * p
        out_t[rec] = n_steps * dt
        out_n[rec] = nbar / norm2
        rec += 1
        out_final[0] = nbar / norm2
        out_final[1] = norm2
    out_final[2] = jumps
    return status


def n_records(n_steps: int, rec_stride: int) -> int:
    """Number of samples coupled/fock trajectories write for these sizes."""
    return (n_steps - 1) // rec_stride + 2
