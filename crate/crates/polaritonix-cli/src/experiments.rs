//! One function per experiment, each returning the tables to write.

use rayon::prelude::*;

use polaritonix::darkstate::{dark_shift_and_rate, gamma_dark_asymptotic, gamma_dark_flat_spectrum, reservoir_spectrum, Regime, DEFAULT_Q};
use polaritonix::dense::{
    decay_rate_histogram, density_sweep, donor_ramp, donor_splitting, sequential_donor_schedule, single_donor_eigs,
    sweep_seed, vrs_full, vrs_reduced_dissipative, vrs_theory, DensitySweepConfig,
};
use polaritonix::fret::{
    ensemble_fret_matrix, fret_rate_oracle_integral, spectral_density, vibronic_spectra, FretRateRequest, RateMatrix,
    VibronicTerms,
};
use polaritonix::macrostate::{evolve, GeneratorParams, InitialState};
use polaritonix::model::{realization_seed, sample_realization, EnsembleSpec, Realization};
use polaritonix::stats::mean_stderr;
use polaritonix::transmission::{spectrum_scan, uniform_grid, ComplexSpectrum};
use polaritonix::C64;

use crate::config::{
    DarkrateParams, DisorderMethod, DonorCubicParams, FretScanParams, FretSettings, MacroParams, Params, TransmitParams,
    VrsSweepParams,
};
use crate::error::CliError;
use crate::output::{Cell, Table};

type Out = Result<Vec<Table>, CliError>;

fn progress(msg: &str) {
    eprintln!("polaritonix: {msg}");
}

fn need_realizations(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::config("n_realizations must be at least 1"));
    }
    Ok(())
}

fn fret_rates(r: &Realization, fret: Option<&FretSettings>) -> Result<Option<RateMatrix>, CliError> {
    match fret {
        Some(f) => Ok(Some(ensemble_fret_matrix(r, &f.vib, f.weight_tol)?)),
        None => Ok(None),
    }
}

fn check_fret(ensemble: &EnsembleSpec, fret: Option<&FretSettings>) -> Result<(), CliError> {
    if fret.is_some() && ensemble.near_field.is_none() {
        return Err(CliError::config("fret needs `ensemble.near_field`"));
    }
    Ok(())
}

/// Per-chunk `(mean, stderr)`; chunks follow task order.
fn chunk_stats(values: &[f64], chunk: usize) -> Vec<(f64, f64)> {
    values.chunks(chunk).map(mean_stderr).collect()
}

pub fn run(params: &Params, seed: u64, aggregate: bool) -> Out {
    match params {
        Params::Transmit(p) => transmit(p, seed, aggregate),
        Params::Darkrate(p) => darkrate(p, seed),
        Params::VrsSweep(p) => vrs_sweep(p, seed),
        Params::FretScan(p) => fret_scan(p),
        Params::DonorCubic(p) => donor_cubic(p),
        Params::Macro(p) => macro_run(p, seed),
    }
}

fn transmit(p: &TransmitParams, seed: u64, aggregate_flag: bool) -> Out {
    need_realizations(p.n_realizations)?;
    check_fret(&p.ensemble, p.fret.as_ref())?;
    let grid = p.grid.values("grid")?;
    progress(&format!("transmit: {} realization(s), {} frequencies", p.n_realizations, grid.len()));
    let spectra: Vec<ComplexSpectrum> = (0..p.n_realizations)
        .into_par_iter()
        .map(|k| {
            let r = sample_realization(&p.ensemble, realization_seed(seed, k as u64))?;
            let rates = fret_rates(&r, p.fret.as_ref())?;
            Ok(spectrum_scan(&r, &p.cavity, &grid, rates.as_ref().map(|m| m.outflow.as_slice()))?)
        })
        .collect::<Result<_, CliError>>()?;
    let columns = ["omega_laser", "re_t", "im_t", "abs_t"];
    if p.aggregate || aggregate_flag {
        let mut table = Table::new("transmit", &columns);
        let count = spectra.len() as f64;
        for (i, &w) in grid.iter().enumerate() {
            let t: C64 = spectra.iter().map(|s| s.t[i]).sum::<C64>() / count;
            let a = spectra.iter().map(|s| s.t[i].norm()).sum::<f64>() / count;
            table.push(vec![w.into(), t.re.into(), t.im.into(), a.into()]);
        }
        return Ok(vec![table]);
    }
    Ok(spectra
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let name = if spectra.len() == 1 {
                "transmit".to_string()
            } else {
                format!("transmit_r{k}")
            };
            let mut table = Table::new(name, &columns);
            for (w, t) in s.omega_grid.iter().zip(&s.t) {
                table.push(vec![(*w).into(), t.re.into(), t.im.into(), t.norm().into()]);
            }
            table
        })
        .collect())
}

fn darkrate(p: &DarkrateParams, seed: u64) -> Out {
    need_realizations(p.n_realizations)?;
    let widths = p.widths.values("widths")?;
    progress(&format!("darkrate: {} widths x {} realizations", widths.len(), p.n_realizations));
    let tasks: Vec<(f64, usize)> = widths
        .iter()
        .flat_map(|&w| (0..p.n_realizations).map(move |k| (w, k)))
        .collect();
    let results: Vec<(f64, f64)> = tasks
        .par_iter()
        .map(|&(w, k)| {
            let spec = EnsembleSpec::uniform(p.n_molecules, 1.0, p.gamma, w);
            let r = sample_realization(&spec, realization_seed(seed, k as u64))?;
            let res = dark_shift_and_rate(&r.deltas, p.gamma)?;
            Ok((res.gamma_dark, res.delta_dark))
        })
        .collect::<Result<_, CliError>>()?;
    let g: Vec<f64> = results.iter().map(|x| x.0).collect();
    let d: Vec<f64> = results.iter().map(|x| x.1).collect();
    let mut table = Table::new(
        "darkrate",
        &[
            "w",
            "gamma_dark_mean",
            "gamma_dark_stderr",
            "delta_dark_mean",
            "delta_dark_stderr",
            "gamma_dark_broad",
            "gamma_dark_narrow",
            "gamma_dark_flat",
        ],
    );
    for ((&w, (gm, gs)), (dm, ds)) in widths
        .iter()
        .zip(chunk_stats(&g, p.n_realizations))
        .zip(chunk_stats(&d, p.n_realizations))
    {
        let broad = gamma_dark_asymptotic(w, p.gamma, Regime::BroadDisorder)?;
        let narrow = gamma_dark_asymptotic(w, p.gamma, Regime::NarrowDisorder)?;
        table.push(vec![
            w.into(),
            gm.into(),
            gs.into(),
            dm.into(),
            ds.into(),
            broad.into(),
            narrow.into(),
            gamma_dark_flat_spectrum(w, p.gamma, DEFAULT_Q).into(),
        ]);
    }
    let mut tables = vec![table];
    if p.dump_spectrum {
        let mut dump = Table::new("darkrate_spectrum", &["w", "index", "shift", "weight"]);
        let spectra: Vec<_> = widths
            .par_iter()
            .map(|&w| {
                let spec = EnsembleSpec::uniform(p.n_molecules, 1.0, p.gamma, w);
                let r = sample_realization(&spec, realization_seed(seed, 0))?;
                Ok(reservoir_spectrum(&r.deltas)?)
            })
            .collect::<Result<_, CliError>>()?;
        for (&w, s) in widths.iter().zip(&spectra) {
            for (j, (x, wt)) in s.eigenvalues_tilde.iter().zip(&s.weights).enumerate() {
                dump.push(vec![w.into(), j.into(), (*x).into(), (*wt).into()]);
            }
        }
        tables.push(dump);
    }
    Ok(tables)
}

fn vrs_sweep(p: &VrsSweepParams, seed: u64) -> Out {
    match p {
        VrsSweepParams::Disorder {
            ensemble,
            cavity,
            widths,
            n_realizations,
            method,
        } => {
            need_realizations(*n_realizations)?;
            let widths = widths.values("widths")?;
            progress(&format!("vrs-sweep: {} widths x {} realizations", widths.len(), n_realizations));
            let tasks: Vec<(f64, usize)> = widths
                .iter()
                .flat_map(|&w| (0..*n_realizations).map(move |k| (w, k)))
                .collect();
            let samples: Vec<[f64; 3]> = tasks
                .par_iter()
                .map(|&(w, k)| {
                    let mut spec = ensemble.clone();
                    spec.disorder_width = w;
                    let r = sample_realization(&spec, realization_seed(seed, k as u64))?;
                    let g_n = r.collective_coupling();
                    let full = match method {
                        DisorderMethod::Reduced => f64::NAN,
                        _ => vrs_full(&r, cavity, None)?.vrs,
                    };
                    let reduced = match method {
                        DisorderMethod::Eigen => f64::NAN,
                        _ => vrs_reduced_dissipative(&r.deltas, None, r.gamma, g_n, cavity.kappa)?.vrs,
                    };
                    Ok([full, reduced, g_n])
                })
                .collect::<Result<_, CliError>>()?;
            let col = |i: usize| samples.iter().map(|s| s[i]).collect::<Vec<f64>>();
            let (full, reduced, g_n) = (col(0), col(1), col(2));
            let mut table = Table::new(
                "vrs_disorder",
                &["w", "vrs_full_mean", "vrs_full_stderr", "vrs_reduced_mean", "vrs_reduced_stderr", "vrs_theory"],
            );
            for (i, &w) in widths.iter().enumerate() {
                let range = i * n_realizations..(i + 1) * n_realizations;
                let (fm, fs) = mean_stderr(&full[range.clone()]);
                let (rm, rs) = mean_stderr(&reduced[range.clone()]);
                let gn = mean_stderr(&g_n[range]).0;
                let theory = vrs_theory(gn, ensemble.gamma, cavity.kappa, w);
                table.push(vec![w.into(), fm.into(), fs.into(), rm.into(), rs.into(), theory.into()]);
            }
            Ok(vec![table])
        }
        VrsSweepParams::Density {
            ensemble,
            cavity,
            vib,
            weight_tol,
            n_values,
            n_realizations,
            method,
            histogram,
        } => {
            if ensemble.near_field.is_none() {
                return Err(CliError::config("density sweep needs `ensemble.near_field`"));
            }
            progress(&format!("vrs-sweep: {} molecule counts x {} realizations", n_values.len(), n_realizations));
            let cfg = DensitySweepConfig {
                ensemble: ensemble.clone(),
                cavity: cavity.clone(),
                vib: vib.clone(),
                weight_tol: *weight_tol,
                n_values: n_values.clone(),
                n_realizations: *n_realizations,
                master_seed: seed,
                method: *method,
            };
            let points = density_sweep(&cfg)?;
            let mut table = Table::new(
                "vrs_density",
                &[
                    "N",
                    "vrs_mean",
                    "vrs_stderr",
                    "vrs_nofret_mean",
                    "vrs_nofret_stderr",
                    "vrs_theory",
                    "mean_outflow",
                ],
            );
            for pt in &points {
                table.push(vec![
                    pt.n.into(),
                    pt.vrs_mean.into(),
                    pt.vrs_stderr.into(),
                    pt.vrs_nofret_mean.into(),
                    pt.vrs_nofret_stderr.into(),
                    pt.vrs_theory.into(),
                    pt.mean_outflow.into(),
                ]);
            }
            let mut tables = vec![table];
            if let Some(h) = histogram {
                for &n in &h.n_molecules {
                    let mut spec = ensemble.clone();
                    spec.n_molecules = n;
                    let r = sample_realization(&spec, sweep_seed(seed, n, 0))?;
                    let rates = ensemble_fret_matrix(&r, vib, *weight_tol)?;
                    let hist = decay_rate_histogram(&rates, r.gamma, h.bins, h.range)?;
                    let mut t = Table::new(format!("decay_histogram_n{n}"), &["bin_left", "bin_right", "mass"]);
                    for ((l, rr), m) in hist.bin_left.iter().zip(&hist.bin_right).zip(&hist.mass) {
                        t.push(vec![(*l).into(), (*rr).into(), (*m).into()]);
                    }
                    tables.push(t);
                }
            }
            Ok(tables)
        }
    }
}

fn fret_scan(p: &FretScanParams) -> Out {
    let deltas = p.delta_diff.values("delta_diff")?;
    let request = |d: f64| FretRateRequest {
        omega_dd: p.omega_dd,
        delta_diff: d,
        vib: p.vib.clone(),
        weight_tol: p.weight_tol,
    };
    request(0.0).validate()?;
    let terms = VibronicTerms::enumerate(&p.vib, p.weight_tol)?;
    progress(&format!("fret-scan: {} channels, {} detunings", terms.terms.len(), deltas.len()));
    let oracle: Vec<f64> = if p.oracle {
        deltas
            .par_iter()
            .map(|&d| fret_rate_oracle_integral(&request(d)))
            .collect::<Result<_, _>>()?
    } else {
        vec![f64::NAN; deltas.len()]
    };
    let mut table = Table::new("fret_scan", &["delta_diff", "rate_forward", "rate_backward", "rate_oracle"]);
    for (&d, o) in deltas.iter().zip(&oracle) {
        table.push(vec![
            d.into(),
            terms.rate(p.omega_dd, d).into(),
            terms.rate(p.omega_dd, -d).into(),
            (*o).into(),
        ]);
    }
    let mut tables = vec![table];
    if let Some(s) = &p.spectra {
        let omega = s.omega.values("spectra.omega")?;
        let (emission, absorption) = vibronic_spectra(&p.vib, s.gamma, s.delta, &omega)?;
        let j = spectral_density(&p.vib, &omega);
        let mut t = Table::new("fret_spectra", &["omega", "emission", "absorption", "J"]);
        for i in 0..omega.len() {
            t.push(vec![omega[i].into(), emission[i].into(), absorption[i].into(), j[i].into()]);
        }
        tables.push(t);
    }
    Ok(tables)
}

fn donor_cubic(p: &DonorCubicParams) -> Out {
    let gps = p.gamma_prime.values("gamma_prime")?;
    let deltas = p.delta.values("delta")?;
    progress(&format!("donor-cubic: {} donor rates x {} detunings", gps.len(), deltas.len()));
    let mut table = Table::new(
        "donor_cubic",
        &["gamma_prime", "delta", "l1_re", "l1_im", "l2_re", "l2_im", "l3_re", "l3_im", "splitting"],
    );
    for &gp in &gps {
        for &delta in &deltas {
            let e = single_donor_eigs(p.n_molecules, p.g, p.gamma, p.kappa, gp, delta)?;
            let mut row: Vec<Cell> = vec![gp.into(), delta.into()];
            for l in &e {
                row.push(l.re.into());
                row.push(l.im.into());
            }
            row.push(donor_splitting(&e).into());
            table.push(row);
        }
    }
    let mut tables = vec![table];
    if let Some(ramp) = &p.ramp {
        if ramp.steps_per_molecule == 0 || !(ramp.gamma_max > 0.0) || !(p.gamma > 0.0) {
            return Err(CliError::config("ramp needs steps_per_molecule >= 1, gamma > 0 and gamma_max > 0"));
        }
        let schedule = donor_ramp(p.n_molecules, ramp.count, p.gamma, ramp.gamma_max, ramp.steps_per_molecule);
        let points = sequential_donor_schedule(p.n_molecules, p.g, p.gamma, p.kappa, &schedule)?;
        let mut t = Table::new("donor_ramp", &["time", "splitting", "weak_coupling"]);
        for pt in &points {
            t.push(vec![pt.time.into(), pt.splitting.into(), pt.weak_coupling.into()]);
        }
        tables.push(t);
    }
    Ok(tables)
}

fn state_label(s: InitialState) -> String {
    String::from(s).replace(':', "")
}

fn macro_run(p: &MacroParams, seed: u64) -> Out {
    need_realizations(p.n_realizations)?;
    check_fret(&p.ensemble, p.fret.as_ref())?;
    if !(p.t_end > 0.0) || p.points < 2 {
        return Err(CliError::config("macro needs t_end > 0 and at least two points"));
    }
    if p.initial_states.is_empty() {
        return Err(CliError::config("initial_states must not be empty"));
    }
    let grid = uniform_grid(0.0, p.t_end, p.points);
    let tasks: Vec<(InitialState, usize)> = p
        .initial_states
        .iter()
        .flat_map(|&s| (0..p.n_realizations).map(move |k| (s, k)))
        .collect();
    progress(&format!("macro: {} trajectory(ies), {} samples", tasks.len(), grid.len()));
    let runs: Vec<Vec<_>> = tasks
        .par_iter()
        .map(|&(state, k)| {
            let r = sample_realization(&p.ensemble, realization_seed(seed, k as u64))?;
            let rates = fret_rates(&r, p.fret.as_ref())?;
            let params = GeneratorParams::from_realization(&r, &p.cavity, p.cavity.omega_laser, rates.as_ref(), p.cavity.eta);
            if params.drive_exceeds_cavity_loss() && k == 0 {
                progress("warning: drive exceeds the cavity loss; the one-excitation truncation is unreliable");
            }
            let rho0 = state.build(r.len())?;
            Ok(evolve(&rho0, &params, &grid)?)
        })
        .collect::<Result<_, CliError>>()?;
    Ok(tasks
        .iter()
        .zip(&runs)
        .map(|(&(state, k), states)| {
            let mut name = "macro".to_string();
            if p.initial_states.len() > 1 {
                name = format!("{name}_{}", state_label(state));
            }
            if p.n_realizations > 1 {
                name = format!("{name}_r{k}");
            }
            let mut t = Table::new(name, &["t", "C", "rho00", "rho_cavity", "purity"]);
            for s in states {
                t.push(vec![
                    s.time.into(),
                    s.macroscopicity().into(),
                    s.ground_population().into(),
                    s.cavity_population().into(),
                    s.purity().into(),
                ]);
            }
            t
        })
        .collect())
}
