use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::DVector;

use super::{christoffel, dispersion, DensityMatrix, ElasticTensor, PhononError};

pub const DEFAULT_CFL: f64 = 0.5;

/// Periodic 1-D grid along a unit direction `n̂` in `R^d`, carrying
/// displacement and velocity samples.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    pub length: f64,
    pub direction: Vec<f64>,
    pub phi: Vec<DVector<f64>>,
    pub vel: Vec<DVector<f64>>,
}

impl WaveState {
    pub fn zeros(direction: Vec<f64>, points: usize, length: f64) -> Self {
        let d = direction.len();
        Self {
            length,
            direction,
            phi: vec![DVector::zeros(d); points],
            vel: vec![DVector::zeros(d); points],
        }
    }

    /// Standing wave `φ(s) = A α cos(k s)`, `v = 0`, with `k = 2π m / L` and
    /// `α` the polarization of `branch` at wave vector `k n̂`.
    #[allow(clippy::too_many_arguments)]
    pub fn plane_wave(
        rho: &DensityMatrix,
        c: &ElasticTensor,
        direction: Vec<f64>,
        points: usize,
        length: f64,
        mode: usize,
        branch: usize,
        amplitude: f64,
    ) -> Result<Self, PhononError> {
        let d = c.dim();
        if branch >= d {
            return Err(PhononError::Input(format!("branch {branch} out of range for dimension {d}")));
        }
        let mut state = Self::zeros(direction, points, length);
        state.validate(d)?;
        let k = TAU * mode as f64 / length;
        let kvec: Vec<f64> = state.direction.iter().map(|x| x * k).collect();
        let alpha = dispersion(rho, c, &kvec)?.polarizations[branch].clone();
        let h = state.spacing();
        for (i, p) in state.phi.iter_mut().enumerate() {
            *p = &alpha * (amplitude * (k * i as f64 * h).cos());
        }
        Ok(state)
    }

    pub fn points(&self) -> usize {
        self.phi.len()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points() as f64
    }

    fn validate(&self, d: usize) -> Result<(), PhononError> {
        if self.direction.len() != d {
            return Err(PhononError::Shape(format!("direction must have {d} components")));
        }
        let norm = self.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(PhononError::Input("direction must be a unit vector".into()));
        }
        if self.points() < 3 {
            return Err(PhononError::Input("grid needs at least 3 points".into()));
        }
        if !(self.length > 0.0) {
            return Err(PhononError::Input("grid length must be positive".into()));
        }
        if self.vel.len() != self.phi.len() {
            return Err(PhononError::Shape("displacement and velocity lengths differ".into()));
        }
        if self.phi.iter().chain(&self.vel).any(|v| v.len() != d) {
            return Err(PhononError::Shape(format!("samples must have {d} components")));
        }
        Ok(())
    }
}

/// Largest admissible time step `cfl · h / c_max`, with `c_max` the fastest
/// sound speed along `direction`. Infinite for a medium with no stiffness.
pub fn max_stable_dt(
    rho: &DensityMatrix,
    c: &ElasticTensor,
    direction: &[f64],
    h: f64,
    cfl: f64,
) -> Result<f64, PhononError> {
    let r = dispersion(rho, c, direction)?;
    let c_max = r.omegas.iter().copied().fold(0.0, f64::max);
    Ok(if c_max > 0.0 { cfl * h / c_max } else { f64::INFINITY })
}

/// Energy at the half step `n + ½`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySample {
    pub step: usize,
    pub time: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeFrequency {
    pub branch: usize,
    /// `ω` from the dispersion relation at the dominant wave number.
    pub predicted: f64,
    /// From the zero crossings of the modal amplitude; `None` when the mode
    /// is not excited or completes too few half periods.
    pub observed: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub final_state: WaveState,
    pub dt: f64,
    pub energy: Vec<EnergySample>,
    /// Dominant wave number of the initial displacement.
    pub wavenumber: f64,
    pub modes: Vec<ModeFrequency>,
}

impl Trajectory {
    /// `max |E_n - E_0| / |E_0|`, zero for a zero-energy run.
    pub fn relative_energy_drift(&self) -> f64 {
        let Some(first) = self.energy.first() else {
            return 0.0;
        };
        if first.total == 0.0 {
            return 0.0;
        }
        self.energy
            .iter()
            .map(|e| ((e.total - first.total) / first.total).abs())
            .fold(0.0, f64::max)
    }

    /// `step,time,kinetic,elastic,total`.
    pub fn write_energy_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "time", "kinetic", "elastic", "total"])?;
        for e in &self.energy {
            w.write_record([
                e.step.to_string(),
                e.time.to_string(),
                e.kinetic.to_string(),
                e.elastic.to_string(),
                e.total.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrates `ρ φ_tt = 𝒞(n̂) φ_ss` on the periodic grid with the
/// kick-drift-kick leapfrog.
///
/// The recorded energy is the half-step form
/// `½ v_{n+½}ᵀ ρ v_{n+½} + ½ (D⁺φ_n)ᵀ 𝒞 (D⁺φ_{n+1})`, summed with weight `h`,
/// which the scheme conserves exactly for this linear system.
pub fn simulate_wave(
    rho: &DensityMatrix,
    c: &ElasticTensor,
    initial: &WaveState,
    dt: f64,
    steps: usize,
    cfl: f64,
) -> Result<Trajectory, PhononError> {
    let d = c.dim();
    if rho.dim() != d {
        return Err(PhononError::Shape("density and tensor dimensions differ".into()));
    }
    initial.validate(d)?;
    if !(dt > 0.0) || !(cfl > 0.0) {
        return Err(PhononError::Input("dt and cfl must be positive".into()));
    }
    let n = initial.points();
    let h = initial.spacing();
    let max_dt = max_stable_dt(rho, c, &initial.direction, h, cfl)?;
    if dt > max_dt {
        return Err(PhononError::Cfl { dt, max_dt });
    }

    let cn = christoffel(c, &initial.direction)?;
    let accel_op = rho
        .cholesky()
        .solve(&cn)
        / (h * h);
    let accel = |phi: &[DVector<f64>]| -> Vec<DVector<f64>> {
        (0..n)
            .map(|i| {
                let lap = &phi[(i + 1) % n] - &phi[i] * 2.0 + &phi[(i + n - 1) % n];
                &accel_op * lap
            })
            .collect()
    };

    let wavenumber = dominant_wavenumber(&initial.phi, initial.length);
    let kvec: Vec<f64> = initial.direction.iter().map(|x| x * wavenumber).collect();
    let disp = dispersion(rho, c, &kvec)?;
    let probes: Vec<DVector<f64>> = disp
        .polarizations
        .iter()
        .map(|a| rho.matrix() * a)
        .collect();
    let positions: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let project = |phi: &[DVector<f64>], probe: &DVector<f64>| {
        let (mut cs, mut sn) = (0.0, 0.0);
        for (p, &s) in phi.iter().zip(&positions) {
            let q = probe.dot(p);
            cs += q * (wavenumber * s).cos();
            sn += q * (wavenumber * s).sin();
        }
        (cs, sn)
    };

    let mut phi = initial.phi.clone();
    let mut vel = initial.vel.clone();
    let mut acc = accel(&phi);
    let mut energy = Vec::with_capacity(steps);
    let mut signals: Vec<Vec<(f64, f64)>> = probes.iter().map(|p| vec![project(&phi, p)]).collect();

    for step in 0..steps {
        for (v, a) in vel.iter_mut().zip(&acc) {
            *v += a * (0.5 * dt);
        }
        let kinetic: f64 = 0.5 * h * vel.iter().map(|v| v.dot(&(rho.matrix() * v))).sum::<f64>();
        let next: Vec<DVector<f64>> = phi.iter().zip(&vel).map(|(p, v)| p + v * dt).collect();
        let elastic = 0.5
            * h
            * (0..n)
                .map(|i| {
                    let j = (i + 1) % n;
                    let g0 = (&phi[j] - &phi[i]) / h;
                    let g1 = (&next[j] - &next[i]) / h;
                    g0.dot(&(&cn * g1))
                })
                .sum::<f64>();
        phi = next;
        acc = accel(&phi);
        for (v, a) in vel.iter_mut().zip(&acc) {
            *v += a * (0.5 * dt);
        }
        energy.push(EnergySample {
            step,
            time: (step as f64 + 0.5) * dt,
            kinetic,
            elastic,
            total: kinetic + elastic,
        });
        for (sig, p) in signals.iter_mut().zip(&probes) {
            sig.push(project(&phi, p));
        }
    }

    // modes far below the strongest one are rounding noise, not excitations
    let strongest = signals.iter().map(|s| peak(s)).fold(0.0, f64::max);
    let modes = signals
        .iter()
        .enumerate()
        .map(|(branch, sig)| ModeFrequency {
            branch,
            predicted: disp.omegas[branch],
            observed: if strongest > 0.0 && peak(sig) > 1e-8 * strongest {
                crossing_frequency(sig, dt)
            } else {
                None
            },
        })
        .collect();

    Ok(Trajectory {
        final_state: WaveState {
            length: initial.length,
            direction: initial.direction.clone(),
            phi,
            vel,
        },
        dt,
        energy,
        wavenumber,
        modes,
    })
}

/// `2π m / L` for the Fourier index `m ∈ [1, n/2]` with the largest power.
fn dominant_wavenumber(phi: &[DVector<f64>], length: f64) -> f64 {
    let n = phi.len();
    let mut best = (0.0, 1usize);
    for m in 1..=n / 2 {
        let mut power = 0.0;
        for comp in 0..phi[0].len() {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, p) in phi.iter().enumerate() {
                let arg = TAU * (m * i) as f64 / n as f64;
                re += p[comp] * arg.cos();
                im += p[comp] * arg.sin();
            }
            power += re * re + im * im;
        }
        if power > best.0 * (1.0 + 1e-12) {
            best = (power, m);
        }
    }
    TAU * best.1 as f64 / length
}

fn peak(signal: &[(f64, f64)]) -> f64 {
    signal.iter().fold(0.0, |m, x| m.max(x.0.abs()).max(x.1.abs()))
}

/// `ω = π (crossings - 1) / (t_last - t_first)` on whichever quadrature
/// component varies more.
fn crossing_frequency(signal: &[(f64, f64)], dt: f64) -> Option<f64> {
    let variance = |f: &dyn Fn(&(f64, f64)) -> f64| {
        let mean = signal.iter().map(f).sum::<f64>() / signal.len() as f64;
        signal.iter().map(|x| (f(x) - mean).powi(2)).sum::<f64>()
    };
    let (vc, vs) = (variance(&|x| x.0), variance(&|x| x.1));
    let pick: Vec<f64> = signal.iter().map(|x| if vc >= vs { x.0 } else { x.1 }).collect();
    if vc.max(vs) == 0.0 {
        return None;
    }
    let mut crossings = Vec::new();
    for (i, w) in pick.windows(2).enumerate() {
        if (w[0] < 0.0 && w[1] >= 0.0) || (w[0] >= 0.0 && w[1] < 0.0) {
            let frac = w[0] / (w[0] - w[1]);
            crossings.push((i as f64 + frac) * dt);
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(PI * (crossings.len() - 1) as f64 / span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonon::{assemble_cubic, CubicModuli};

    fn cubic() -> (DensityMatrix, ElasticTensor) {
        assemble_cubic(&CubicModuli {
            c11: 1.0,
            c12: 0.5,
            c44: 0.3,
            rho: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let (rho, c) = cubic();
        let s = WaveState::zeros(vec![1.0, 0.0, 0.0], 32, 1.0);
        let t = simulate_wave(&rho, &c, &s, 1e-3, 50, DEFAULT_CFL).unwrap();
        assert!(t.energy.iter().all(|e| e.total == 0.0));
        assert_eq!(t.final_state, s);
        assert!(t.modes.iter().all(|m| m.observed.is_none()));
    }

    #[test]
    fn cfl_violation_reports_the_bound() {
        let (rho, c) = cubic();
        let s = WaveState::zeros(vec![1.0, 0.0, 0.0], 100, 1.0);
        // c_max = 1 along [100], h = 0.01
        match simulate_wave(&rho, &c, &s, 0.01, 1, DEFAULT_CFL) {
            Err(PhononError::Cfl { max_dt, .. }) => assert!((max_dt - 0.005).abs() < 1e-15),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn bad_states_are_rejected() {
        let (rho, c) = cubic();
        let s = WaveState::zeros(vec![1.0, 1.0, 0.0], 16, 1.0);
        assert!(simulate_wave(&rho, &c, &s, 1e-3, 1, DEFAULT_CFL).is_err());
        let s = WaveState::zeros(vec![1.0, 0.0], 16, 1.0);
        assert!(simulate_wave(&rho, &c, &s, 1e-3, 1, DEFAULT_CFL).is_err());
    }

    #[test]
    fn dominant_wavenumber_of_a_mode() {
        let phi: Vec<DVector<f64>> = (0..64)
            .map(|i| DVector::from_vec(vec![(TAU * 3.0 * i as f64 / 64.0).cos(), 0.0]))
            .collect();
        assert!((dominant_wavenumber(&phi, 2.0) - TAU * 3.0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_fit_recovers_a_cosine() {
        let dt = 1e-3;
        let sig: Vec<(f64, f64)> = (0..20_000).map(|i| ((2.5 * i as f64 * dt).cos(), 0.0)).collect();
        let w = crossing_frequency(&sig, dt).unwrap();
        assert!((w - 2.5).abs() < 1e-6);
    }

    #[test]
    fn longitudinal_mode_frequency_and_energy() {
        let (rho, c) = cubic();
        let dir = vec![1.0, 0.0, 0.0];
        let s = WaveState::plane_wave(&rho, &c, dir.clone(), 128, 1.0, 1, 2, 1e-3).unwrap();
        let dt = max_stable_dt(&rho, &c, &dir, s.spacing(), DEFAULT_CFL).unwrap();
        let t = simulate_wave(&rho, &c, &s, dt, 2000, DEFAULT_CFL).unwrap();
        let l = &t.modes[2];
        assert!((l.predicted - TAU).abs() < 1e-12);
        let rel = (l.observed.unwrap() - l.predicted).abs() / l.predicted;
        assert!(rel < 1e-2, "relative error {rel}");
        assert!(t.modes[0].observed.is_none());
        assert!(t.relative_energy_drift() < 1e-9);
    }

    #[test]
    fn energy_csv_layout() {
        let (rho, c) = cubic();
        let s = WaveState::zeros(vec![1.0, 0.0, 0.0], 8, 1.0);
        let t = simulate_wave(&rho, &c, &s, 0.01, 2, DEFAULT_CFL).unwrap();
        let mut buf = Vec::new();
        t.write_energy_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "step,time,kinetic,elastic,total\n0,0.005,0,0,0\n1,0.015,0,0,0\n");
    }
}
