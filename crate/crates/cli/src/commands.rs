use std::time::Instant;

use anyhow::{bail, Result};
use fermicov::car_fock::{expect_monomial, quasifree_density, wick_from_symbol, MonomialSpec};
use fermicov::covariance::{covariance_det, decay_parameter, kernel_g, kernel_residual};
use fermicov::mspace::bk_matrix;
use fermicov::perm::Permutation;
use fermicov::report::{bound_reports_csv, fmt_f64, sharpness_reports_csv, table_csv, Summary};
use fermicov::spectral::{eig_hermitian, is_singular, HermitianMatrix};
use fermicov::verify::{
    bound_check_suite, check_instance, generate_instance, hermitian_with_spectrum, instance_seed,
    random_tree, random_vector, sharpness_sweep, slack_tolerance, universal_bound_estimate,
    GeneratorConfig,
};
use fermicov::modular::determinant_representation;
use fermicov::{CVec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{finite, ColorsConfig, ExperimentConfig, HamiltonianConfig, LambdaArg};

pub struct Outcome {
    pub csv: String,
    pub summary: Summary,
    pub note: Option<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.summary.failures.is_empty()
    }
}

fn summary(suite: &str, count: usize, failures: Vec<u64>, min_slack: Option<f64>, start: Instant) -> Summary {
    Summary {
        suite: suite.to_string(),
        count,
        failures,
        min_slack,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

fn c64_cells(z: C64) -> [String; 2] {
    [fmt_f64(z.re), fmt_f64(z.im)]
}

pub struct KernelArgs {
    pub beta: Option<f64>,
    pub n: Option<usize>,
    pub lambda: Option<LambdaArg>,
    pub eta: Option<f64>,
    pub force_finite_eta: bool,
}

pub fn kernel(cfg: &ExperimentConfig, args: KernelArgs) -> Result<Outcome> {
    let start = Instant::now();
    let torus = cfg.torus(args.beta, args.n)?;
    let lambda = args
        .lambda
        .or(cfg.lambda.clone())
        .unwrap_or(LambdaArg::Named("singular".into()))
        .value(&torus)?;
    let eta = if args.force_finite_eta {
        Some(finite("eta", args.eta.or(cfg.eta.as_ref().and_then(|e| e.first().copied())).unwrap_or(10.0))?)
    } else {
        None
    };
    let k = kernel_g(lambda, &torus, eta)?;
    let residual = kernel_residual(&k);
    let rows: Vec<Vec<String>> = torus
        .points()
        .map(|p| vec![p.tick().to_string(), fmt_f64(torus.alpha(p)), fmt_f64(k.at(p))])
        .collect();
    let tol = 1e-9 * torus.inv_step();
    // the finite-eta branch at the singular value solves the equation only in the limit
    let asserted = !(eta.is_some() && is_singular(lambda, &torus));
    let failures = if asserted && residual > tol { vec![0] } else { Vec::new() };
    Ok(Outcome {
        csv: table_csv(&["tick", "alpha", "g"], &rows),
        summary: summary("kernel", rows.len(), failures, None, start),
        note: Some(format!("lambda = {}, residual = {}", fmt_f64(lambda), fmt_f64(residual))),
    })
}

pub fn covariance_det_cmd(cfg: &ExperimentConfig, seed: u64, beta: Option<f64>, n: Option<usize>, etas: &[f64]) -> Result<Outcome> {
    let start = Instant::now();
    let inst = match cfg.explicit_instance(cfg.torus(beta, n)?, seed)? {
        Some(inst) => inst,
        None => generate_instance(&cfg.generator()?, seed)?,
    };
    let report = check_instance(&inst, 0, seed)?;
    let mut rows = vec![det_row("inf", report.det, report.bound, true)];
    for &eta in etas {
        let det = covariance_det(&inst, Some(finite("eta", eta)?))?;
        rows.push(det_row(&fmt_f64(eta), det, report.bound, false));
    }
    let failures = if report.pass { Vec::new() } else { vec![seed] };
    Ok(Outcome {
        csv: table_csv(&["eta", "det_re", "det_im", "det_abs", "bound", "slack", "pass"], &rows),
        summary: summary("covariance-det", 1, failures, Some(report.slack), start),
        note: None,
    })
}

fn det_row(eta: &str, det: C64, bound: f64, asserted: bool) -> Vec<String> {
    let slack = bound - det.norm();
    let [re, im] = c64_cells(det);
    let pass = !asserted || slack >= slack_tolerance(bound);
    vec![eta.to_string(), re, im, fmt_f64(det.norm()), fmt_f64(bound), fmt_f64(slack), pass.to_string()]
}

pub fn wick_verify(cfg: &ExperimentConfig, count: u64, seed: u64, order_max: Option<usize>, modes: Option<usize>) -> Result<Outcome> {
    let start = Instant::now();
    let w = cfg.wick.clone();
    let modes = modes.or(w.as_ref().and_then(|w| w.modes)).unwrap_or(4);
    let order_max = order_max.or(w.as_ref().and_then(|w| w.order_max)).unwrap_or(3);
    let scale = finite("wick.scale", w.as_ref().and_then(|w| w.scale).unwrap_or(2.0))?;
    let beta = finite("wick.beta", w.as_ref().and_then(|w| w.beta).unwrap_or(1.0))?;
    if modes == 0 || order_max == 0 || order_max > 4 {
        bail!("wick-verify needs modes >= 1 and 1 <= order_max <= 4");
    }
    let draws: Vec<(u64, Vec<Vec<String>>, bool)> = (0..count)
        .into_par_iter()
        .map(|id| {
            let s = instance_seed(seed, id);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let eig: Vec<f64> = (0..modes).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
            let h = hermitian_with_spectrum(&mut rng, &eig)?;
            let state = quasifree_density(&h, beta)?;
            let mut rows = Vec::new();
            let mut ok = true;
            for order in 1..=order_max {
                let psis: Vec<CVec> = (0..2 * order).map(|_| random_vector(&mut rng, modes)).collect();
                let norm: f64 = psis.iter().map(|p| p.norm()).product();
                for pi in Permutation::all(2 * order) {
                    let spec = MonomialSpec::new(order, order, psis.clone(), pi.clone())?;
                    let fock = expect_monomial(&state, &spec)?;
                    let wick = wick_from_symbol(state.symbol(), &psis, &pi)?;
                    let err = (fock - wick).norm();
                    let pass = err <= (1e-10 * fock.norm()).max(1e-12 * norm);
                    ok &= pass;
                    let images: Vec<String> = pi.images().iter().map(|i| (i + 1).to_string()).collect();
                    let [fr, fi] = c64_cells(fock);
                    let [wr, wi] = c64_cells(wick);
                    rows.push(vec![
                        id.to_string(),
                        s.to_string(),
                        order.to_string(),
                        images.join(" "),
                        fr,
                        fi,
                        wr,
                        wi,
                        fmt_f64(err),
                        pass.to_string(),
                    ]);
                }
            }
            Ok((s, rows, ok))
        })
        .collect::<fermicov::Result<_>>()?;
    let failures = draws.iter().filter(|d| !d.2).map(|d| d.0).collect();
    let rows: Vec<Vec<String>> = draws.into_iter().flat_map(|d| d.1).collect();
    let header = ["draw", "seed", "N", "pi", "fock_re", "fock_im", "wick_re", "wick_im", "abs_err", "pass"];
    Ok(Outcome {
        csv: table_csv(&header, &rows),
        summary: summary("wick-verify", count as usize, failures, None, start),
        note: None,
    })
}

/// Default generator for modular-verify: small Fock spaces, no pinned eigenvalue.
fn modular_generator(cfg: &ExperimentConfig) -> Result<GeneratorConfig> {
    let g = cfg.generator.clone().unwrap_or(GeneratorConfig {
        d_max: 2,
        m_max: 2,
        order_max: 2,
        singular_prob: 0.0,
        ..GeneratorConfig::default()
    });
    g.validate()?;
    Ok(g)
}

pub fn modular_verify(cfg: &ExperimentConfig, count: u64, seed: u64, etas: &[f64]) -> Result<Outcome> {
    let start = Instant::now();
    let gen = modular_generator(cfg)?;
    let etas: Vec<f64> = if etas.is_empty() { vec![2.0, 4.0, 8.0, 16.0] } else { etas.to_vec() };
    for &e in &etas {
        finite("eta", e)?;
    }
    let cap = fermicov::car_fock::fock_cap();
    let results: Vec<(u64, Vec<String>, bool)> = (0..count)
        .into_par_iter()
        .map(|id| {
            let s = instance_seed(seed, id);
            let inst = generate_instance(&gen, s)?;
            let det = covariance_det(&inst, None)?;
            let d_total = inst.h().dim() * inst.colors().nrows();
            let singular = inst.spectral().eigenvalues().iter().any(|&l| is_singular(l, inst.torus()));
            let (status, rep, err, pass) = if d_total > cap {
                ("skipped", C64::new(f64::NAN, f64::NAN), f64::NAN, true)
            } else if singular {
                // convergence toward the limit is reported, not asserted
                let eta = *etas.last().expect("nonempty");
                let rep = determinant_representation(&inst, eta)?;
                ("singular", rep, (rep - det).norm(), true)
            } else {
                let rep = determinant_representation(&inst, etas[0])?;
                let err = (rep - det).norm();
                let floor = 1e-12 * inst.bound().max(1.0);
                ("regular", rep, err, err <= (1e-8 * det.norm()).max(floor))
            };
            let [dr, di] = c64_cells(det);
            let [rr, ri] = c64_cells(rep);
            let row = vec![
                id.to_string(),
                s.to_string(),
                inst.h().dim().to_string(),
                inst.colors().nrows().to_string(),
                inst.order().to_string(),
                inst.torus().n().to_string(),
                fmt_f64(inst.torus().beta()),
                dr,
                di,
                rr,
                ri,
                fmt_f64(err),
                status.to_string(),
                pass.to_string(),
            ];
            Ok((s, row, pass))
        })
        .collect::<fermicov::Result<_>>()?;
    let failures = results.iter().filter(|r| !r.2).map(|r| r.0).collect();
    let rows: Vec<Vec<String>> = results.into_iter().map(|r| r.1).collect();
    let header = [
        "instance_id", "seed", "d", "m", "N", "n", "beta", "det_re", "det_im", "rep_re", "rep_im", "abs_err",
        "status", "pass",
    ];
    Ok(Outcome {
        csv: table_csv(&header, &rows),
        summary: summary("modular-verify", count as usize, failures, None, start),
        note: None,
    })
}

pub fn bound_check(cfg: &ExperimentConfig, count: u64, seed: u64) -> Result<Outcome> {
    let start = Instant::now();
    let reports = bound_check_suite(count, &cfg.generator()?, seed)?;
    Ok(Outcome {
        csv: bound_reports_csv(&reports),
        summary: Summary::from_bound_reports("bound-check", &reports, start.elapsed().as_secs_f64()),
        note: None,
    })
}

pub fn bk(cfg: &ExperimentConfig, m: Option<usize>, seed: u64, t: Option<f64>) -> Result<Outcome> {
    let start = Instant::now();
    let from_file = match &cfg.colors {
        Some(c @ (ColorsConfig::Tree { .. } | ColorsConfig::RandomTree { .. })) => c.tree(seed)?,
        Some(_) => bail!("bk-matrix needs colors of kind \"tree\" or \"random_tree\""),
        None => None,
    };
    let (tree, t) = match (from_file, m) {
        (Some((tree, file_t)), None) => (tree, t.unwrap_or(file_t)),
        (_, m) => (random_tree(&mut ChaCha8Rng::seed_from_u64(seed), m.unwrap_or(4))?, t.unwrap_or(1.0)),
    };
    let mat = bk_matrix(&tree, finite("t", t)?)?;
    let min = mat.clone().symmetric_eigenvalues().min();
    let mut rows = Vec::new();
    for k in 0..mat.nrows() {
        for l in 0..mat.ncols() {
            rows.push(vec![k.to_string(), l.to_string(), fmt_f64(mat[(k, l)])]);
        }
    }
    let failures = if min >= -1e-10 { Vec::new() } else { vec![seed] };
    Ok(Outcome {
        csv: table_csv(&["k", "l", "value"], &rows),
        summary: summary("bk-matrix", 1, failures, Some(min), start),
        note: Some(format!("min eigenvalue = {}", fmt_f64(min))),
    })
}

pub fn sharpness(epsilons: &[f64], beta: f64, orders: &[usize]) -> Result<Outcome> {
    let start = Instant::now();
    let mut reports = Vec::new();
    for &eps in epsilons {
        reports.extend(sharpness_sweep(finite("epsilon", eps)?, finite("beta", beta)?, orders)?);
    }
    let failures = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.pass)
        .map(|(i, _)| i as u64)
        .collect();
    Ok(Outcome {
        csv: sharpness_reports_csv(&reports),
        summary: summary("sharpness", reports.len(), failures, None, start),
        note: None,
    })
}

pub fn universal(cfg: &ExperimentConfig, epsilons: &[f64], beta: f64, orders: &[usize], count: u64, seed: u64) -> Result<Outcome> {
    let start = Instant::now();
    let bounds = bound_check_suite(count, &cfg.generator()?, seed)?;
    let mut rows = Vec::new();
    let mut failures: Vec<u64> = bounds.iter().filter(|r| !r.pass).map(|r| r.seed).collect();
    for &eps in epsilons {
        let sharp = sharpness_sweep(finite("epsilon", eps)?, finite("beta", beta)?, orders)?;
        let b = universal_bound_estimate(&bounds, &sharp)?;
        if !b.pass && failures.is_empty() {
            failures.push(seed);
        }
        rows.push(vec![
            fmt_f64(b.epsilon),
            fmt_f64(b.lower),
            fmt_f64(b.upper),
            b.bound_instances.to_string(),
            b.bound_violations.to_string(),
            b.pass.to_string(),
        ]);
    }
    let header = ["epsilon", "lower", "upper", "bound_instances", "bound_violations", "pass"];
    Ok(Outcome {
        csv: table_csv(&header, &rows),
        summary: summary(
            "universal",
            bounds.len(),
            failures,
            bounds.iter().map(|r| r.slack).reduce(f64::min),
            start,
        ),
        note: Some("numerical bracket, not a certificate".into()),
    })
}

pub fn decay(cfg: &ExperimentConfig, beta: Option<f64>, ns: &[usize], seed: u64) -> Result<Outcome> {
    let start = Instant::now();
    let h = match &cfg.hamiltonian {
        Some(ham) => ham.build(seed)?,
        None => HamiltonianConfig::Diagonal { values: vec![0.0] }.build(seed)?,
    };
    let chi = cfg.cutoff()?;
    let spectral = eig_hermitian(&h)?;
    let basis = canonical_basis(&h);
    let mut rows = Vec::new();
    for &n in ns {
        let torus = cfg.torus(beta, Some(n))?;
        let value = decay_parameter(&spectral, &chi, &basis, &torus)?;
        rows.push(vec![n.to_string(), fmt_f64(torus.beta()), fmt_f64(value)]);
    }
    Ok(Outcome {
        csv: table_csv(&["n", "beta", "decay"], &rows),
        summary: summary("decay", rows.len(), Vec::new(), None, start),
        note: None,
    })
}

fn canonical_basis(h: &HermitianMatrix) -> Vec<CVec> {
    (0..h.dim())
        .map(|i| CVec::from_fn(h.dim(), |j, _| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
        .collect()
}
