//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see them).
//!
//! Criterion 1 is split: the Eq.-21 asymptote (1a) holds with two orders of
//! margin, but the literal "<= 5% pointwise" envelope against the effective
//! law (1b) is violated by the atom-follows-field transient of the exact
//! dynamics (6.1% at M = 1, 5.3% at M = 2, measured at gamma t ~ 4-5 and
//! reproducible from the closed-form single-excitation solution). 1b asserts
//! the stated tolerance anyway and is expected to fail; see README.

use std::sync::OnceLock;
use std::time::Instant;

use darkfield::analysis::{energy_partition, g1_intensity, planck_report};
use darkfield::collective::{build_basis, collective_state, CollectiveIndex};
use darkfield::combinatorics as comb;
use darkfield::dynamics::{
    effective_nbar, evolve, hamiltonian_at, kappa, lindblad_rhs, EvolutionConfig,
    TrajectoryRecord,
};
use darkfield::hilbert::{DensityMatrix, ModeSpec, StateVector, SystemSpec};
use darkfield::thermal::product_thermal;

use darkfield_cli::config::{Scenario, ScenarioConfig};
use darkfield_cli::presets::{resolve, ResolvedRun, TrajectoryRun};

struct Run {
    record: TrajectoryRecord,
    seconds: f64,
    g: f64,
}

fn preset_trajectory(scenario: Scenario, modes: Option<usize>) -> TrajectoryRun {
    let mut config = ScenarioConfig::new(scenario);
    if let Some(m) = modes {
        config.overrides.set("modes", &m.to_string()).unwrap();
    }
    let (resolved, _) = resolve(&config).unwrap();
    match resolved {
        ResolvedRun::Trajectory(run) => *run,
        _ => panic!("expected a trajectory scenario"),
    }
}

fn execute(run: &TrajectoryRun) -> Run {
    let initial = product_thermal(&run.spec).unwrap();
    let start = Instant::now();
    let record = evolve(&run.spec, &run.schedule, &initial, &run.config).unwrap();
    Run { record, seconds: start.elapsed().as_secs_f64(), g: run.g }
}

fn fig2(m: usize) -> &'static Run {
    static RUNS: [OnceLock<Run>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    RUNS[m - 1].get_or_init(|| execute(&preset_trajectory(Scenario::Fig2, Some(m))))
}

fn fig3() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| execute(&preset_trajectory(Scenario::Fig3, None)))
}

fn figs2() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| execute(&preset_trajectory(Scenario::FigS2, None)))
}

fn normalized(record: &TrajectoryRecord, name: &str) -> Vec<f64> {
    let series = record.series(name).unwrap();
    let first = series[0];
    series.iter().map(|v| v / first).collect()
}

fn verdict(name: &str, pass: bool, detail: &str) {
    println!("criterion {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {name}: {detail}");
}

#[test]
fn criterion_01a_fig2_asymptote() {
    let mut detail = String::new();
    let mut pass = true;
    for m in [1usize, 2, 3] {
        let run = fig2(m);
        let ratios = normalized(&run.record, "nbar_total");
        let final_ratio = *ratios.last().unwrap();
        let target = (m as f64 - 1.0) / m as f64;
        let dev = (final_ratio - target).abs();
        pass &= dev <= 0.02 && run.seconds <= 60.0;
        detail.push_str(&format!(
            "M={m}: ratio {final_ratio:.5} vs {target:.5} (dev {dev:.1e}), {:.1} s; ",
            run.seconds
        ));
    }
    verdict("1a (fig2 asymptote at t = 8/kappa, runtime <= 60 s/M)", pass, detail.trim_end());
}

#[test]
fn criterion_01b_fig2_effective_envelope() {
    // As specified: |nbar_norm(t) - effective_nbar(t)/nbar0| <= 0.05 at every
    // sample, for every M. The early-time transient of the full equation
    // exceeds this for M = 1 and M = 2; the assertion is kept at the stated
    // tolerance on purpose (see the module docs and README).
    let mut detail = String::new();
    let mut pass = true;
    for m in [1usize, 2, 3] {
        let run = fig2(m);
        let k = kappa(m, run.g, 1.0).unwrap();
        let ratios = normalized(&run.record, "nbar_total");
        let mut max_dev = 0.0f64;
        for (t, ratio) in run.record.times.iter().zip(&ratios) {
            let eff = effective_nbar(*t, m, 1.0, k);
            max_dev = max_dev.max((ratio - eff).abs());
        }
        pass &= max_dev <= 0.05;
        detail.push_str(&format!("M={m}: max pointwise dev {max_dev:.4}; "));
    }
    verdict("1b (fig2 effective envelope <= 5% pointwise)", pass, detail.trim_end());
}

#[test]
fn criterion_02_fig3_plateau_and_drain() {
    let run = fig3();
    let ratios = normalized(&run.record, "nbar_total");
    let at = |t: f64| {
        let idx = run
            .record
            .times
            .iter()
            .position(|x| (x - t).abs() < 1e-9)
            .unwrap_or_else(|| panic!("no sample at t = {t}"));
        ratios[idx]
    };
    let plateau = at(49.0);
    let residue = at(100.0);
    let pass = (0.48..=0.52).contains(&plateau) && residue <= 0.02 && run.seconds <= 30.0;
    verdict(
        "2 (fig3 plateau and post-break drain, runtime <= 30 s)",
        pass,
        &format!(
            "plateau at t=49: {plateau:.4}; residue at t=100: {residue:.2e}; {:.1} s",
            run.seconds
        ),
    );
}

#[test]
fn criterion_03_figs2_full_drain() {
    let run = figs2();
    let ratios = normalized(&run.record, "nbar_total");
    let final_ratio = *ratios.last().unwrap();
    let pass = final_ratio <= 0.02 && run.seconds <= 600.0;
    verdict(
        "3 (figs2 detuned modes drain below 2%, runtime <= 10 min)",
        pass,
        &format!("final ratio {final_ratio:.4} at t = {}; {:.0} s", run.record.times.last().unwrap(), run.seconds),
    );
}

#[test]
fn criterion_04_combinatorics_exact() {
    let start = Instant::now();
    let mut pass = true;
    for n in 0..=10usize {
        for m in 2..=8usize {
            pass &= comb::count_dark(n, m).unwrap() == comb::brute_count_dark(n, m).unwrap();
            pass &= comb::count_all(n, m).unwrap() == comb::brute_count_all(n, m).unwrap();
            for n0 in 0..=n {
                pass &= comb::count_fixed_n0(n, m, n0).unwrap()
                    == comb::brute_count_fixed_n0(n, m, n0).unwrap();
            }
            pass &= comb::initial_excitations(n, m).unwrap()
                == comb::brute_initial_excitations(n, m).unwrap();
            pass &= comb::final_excitations(n, m).unwrap()
                == comb::brute_final_excitations(n, m).unwrap();
            if n >= 1 {
                let ratio = comb::survival_ratio(n, m).unwrap();
                pass &= ratio
                    == num_rational::Ratio::new(
                        num_bigint::BigUint::from(m - 1),
                        num_bigint::BigUint::from(m),
                    );
                pass &= ratio == comb::brute_survival_ratio(n, m).unwrap();
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    pass &= seconds <= 5.0;
    verdict(
        "4 (combinatorics exact for N <= 10, M <= 8, runtime <= 5 s)",
        pass,
        &format!("all closed forms equal nested sums; {seconds:.2} s"),
    );
}

#[test]
fn criterion_05_intensity_triplet() {
    let single = SystemSpec::new(vec![ModeSpec::resonant(3, 0.0).unwrap()], 1.0, false).unwrap();
    let fock = DensityMatrix::pure(&StateVector::basis(single.dim(), 1).unwrap()).unwrap();
    let one = g1_intensity(&fock, &[1.0], &single).unwrap();

    let pair = SystemSpec::new(
        vec![ModeSpec::resonant(3, 0.0).unwrap(), ModeSpec::resonant(3, 0.0).unwrap()],
        1.0,
        false,
    )
    .unwrap();
    let basis = build_basis(2).unwrap();
    let delocalized =
        collective_state(&basis, &CollectiveIndex::new(vec![1, 0]).unwrap(), &pair).unwrap();
    let two = g1_intensity(&DensityMatrix::pure(&delocalized).unwrap(), &[1.0, 1.0], &pair)
        .unwrap();

    let ten = DensityMatrix::pure(
        &StateVector::basis(pair.dim(), pair.encode(false, &[1, 0])).unwrap(),
    )
    .unwrap();
    let zero_one = DensityMatrix::pure(
        &StateVector::basis(pair.dim(), pair.encode(false, &[0, 1])).unwrap(),
    )
    .unwrap();
    let mut mixture = ten.matrix().scale(num_complex::Complex64::new(0.5, 0.0));
    mixture.scaled_add(num_complex::Complex64::new(0.5, 0.0), zero_one.matrix());
    let mixed = g1_intensity(
        &DensityMatrix::from_matrix(mixture).unwrap(),
        &[1.0, 1.0],
        &pair,
    )
    .unwrap();

    let pass =
        (one - 1.0).abs() <= 1e-10 && (two - 2.0).abs() <= 1e-10 && (mixed - 1.0).abs() <= 1e-10;
    verdict(
        "5 (intensity triplet 1, 2, 1 within 1e-10)",
        pass,
        &format!("single {one:.12}, delocalized {two:.12}, mixture {mixed:.12}"),
    );
}

#[test]
fn criterion_06_thermal_partition() {
    let mut pass = true;
    let mut detail = String::new();
    for m in 2..=5usize {
        let spec = SystemSpec::new(
            (0..m).map(|_| ModeSpec::resonant(3, 0.1).unwrap()).collect(),
            1.0,
            false,
        )
        .unwrap();
        let basis = build_basis(m).unwrap();
        let rho = product_thermal(&spec).unwrap();
        let part = energy_partition(&rho, &basis, &spec).unwrap();
        let dev = (part.dark_fraction() - (m as f64 - 1.0) / m as f64).abs();
        pass &= dev <= 1e-6;
        detail.push_str(&format!("M={m}: dev {dev:.1e}; "));
    }

    // Two unequal thermal modes: both collective occupations are the mean.
    let spec = SystemSpec::new(
        vec![ModeSpec::resonant(14, 0.3).unwrap(), ModeSpec::resonant(14, 0.1).unwrap()],
        1.0,
        false,
    )
    .unwrap();
    let basis = build_basis(2).unwrap();
    let part = energy_partition(&product_thermal(&spec).unwrap(), &basis, &spec).unwrap();
    let half_sum = 0.2;
    let dev_unequal =
        (part.bright - half_sum).abs().max((part.dark - half_sum).abs());
    pass &= dev_unequal <= 1e-6;
    detail.push_str(&format!("unequal pair dev {dev_unequal:.1e}"));
    verdict("6 (thermal partition (M-1)/M and two-mode split within 1e-6)", pass, &detail);
}

#[test]
fn criterion_07_dark_state_inertness() {
    // Static part: the generator annihilates |g><g| (x) dark projector.
    let spec = SystemSpec::uniform(2, 5, 0.0, 1.0).unwrap();
    let schedule = darkfield::dynamics::CouplingSchedule::constant(vec![0.1, 0.1]).unwrap();
    let h = hamiltonian_at(&spec, &schedule, 0.0).unwrap();
    let basis = build_basis(2).unwrap();
    let dark =
        collective_state(&basis, &CollectiveIndex::new(vec![0, 1]).unwrap(), &spec).unwrap();
    let rho = DensityMatrix::pure(&dark).unwrap();
    let rhs_max = lindblad_rhs(&rho, &h, 1.0).unwrap().max_abs();

    // Dynamic part: dark collective occupations stay put along fig2 runs.
    let mut max_drift = 0.0f64;
    for m in [2usize, 3] {
        let run = fig2(m);
        for mu in 1..m {
            let series = run.record.series(&format!("ncoll_{mu}")).unwrap();
            let first = series[0];
            for v in series {
                max_drift = max_drift.max((v - first).abs());
            }
        }
    }
    let pass = rhs_max <= 1e-10 && max_drift <= 1e-4;
    verdict(
        "7 (dark states inert: generator 1e-10, trajectory drift 1e-4)",
        pass,
        &format!("generator max entry {rhs_max:.2e}; max dark drift {max_drift:.2e}"),
    );
}

#[test]
fn criterion_08_planck_ratios() {
    let stellar = planck_report(3500.0).unwrap();
    let sun = planck_report(5770.0).unwrap();
    let quad_rel = |quad: f64, closed: f64| ((quad - closed) / closed).abs();
    let worst_quad = quad_rel(stellar.u_total_quadrature, stellar.u_total)
        .max(quad_rel(stellar.u_one_quadrature, stellar.u_one))
        .max(quad_rel(sun.u_total_quadrature, sun.u_total))
        .max(quad_rel(sun.u_one_quadrature, sun.u_one));
    let pass = (stellar.ratio - 3117.0).abs() <= 1.0
        && (sun.ratio - 8471.0).abs() <= 1.0
        && worst_quad <= 1e-6;
    verdict(
        "8 (Planck ratios 3117/8471 within 1, quadrature within 1e-6)",
        pass,
        &format!(
            "ratio(3500 K) = {:.2}, ratio(5770 K) = {:.2}, worst quadrature rel {worst_quad:.1e}",
            stellar.ratio, sun.ratio
        ),
    );
}

#[test]
fn criterion_09_numerical_hygiene() {
    let mut pass = true;
    let mut detail = String::new();

    // Invariants at every sample point of the criterion 1-3 runs.
    let mut worst_trace = 0.0f64;
    let mut worst_herm = 0.0f64;
    let mut worst_eig = f64::INFINITY;
    for record in [
        &fig2(1).record,
        &fig2(2).record,
        &fig2(3).record,
        &fig3().record,
        &figs2().record,
    ] {
        let inv = &record.metadata.invariants;
        worst_trace = worst_trace.max(inv.max_trace_deviation);
        worst_herm = worst_herm.max(inv.max_hermiticity_defect);
        worst_eig = worst_eig.min(inv.min_eigenvalue.expect("positivity checked"));
    }
    pass &= worst_trace <= 1e-7 && worst_herm <= 1e-10 && worst_eig >= -1e-8;
    detail.push_str(&format!(
        "trace {worst_trace:.1e}, herm {worst_herm:.1e}, min eig {worst_eig:.1e}; "
    ));

    // Halving dt moves the reported observables by < 1e-5 (fig2 M=2, fig3).
    let mut worst_dt = 0.0f64;
    for (scenario, m) in [(Scenario::Fig2, Some(2)), (Scenario::Fig3, None)] {
        let base = preset_trajectory(scenario, m);
        let coarse = execute(&base);
        let mut halved = base.clone();
        halved.config = EvolutionConfig::new(
            base.config.t_end,
            base.config.dt / 2.0,
            base.config.sample_every * 2,
        )
        .unwrap()
        .with_observables(darkfield_cli::presets::standard_observables(&base.spec).unwrap());
        halved.config.check_positivity = false;
        let fine = execute(&halved);
        assert_eq!(coarse.record.times.len(), fine.record.times.len());
        for series in &coarse.record.series {
            let other = fine.record.series(&series.name).unwrap();
            for (a, b) in series.values.iter().zip(other) {
                worst_dt = worst_dt.max((a - b).abs());
            }
        }
    }
    pass &= worst_dt < 1e-5;
    detail.push_str(&format!("dt halving max shift {worst_dt:.1e}; "));

    // Doubling the Fock cutoffs moves the criterion-1/2 curves by < 1e-3.
    let mut worst_cutoff = 0.0f64;
    for (scenario, m) in
        [(Scenario::Fig2, Some(1)), (Scenario::Fig2, Some(2)), (Scenario::Fig2, Some(3)), (Scenario::Fig3, None)]
    {
        let mut config = ScenarioConfig::new(scenario);
        if let Some(m) = m {
            config.overrides.set("modes", &m.to_string()).unwrap();
        }
        config.overrides.set("cutoffs", "10").unwrap();
        let (resolved, _) = resolve(&config).unwrap();
        let ResolvedRun::Trajectory(mut doubled) = resolved else { panic!() };
        doubled.config.check_positivity = false;
        let wide = execute(&doubled);
        let base = match scenario {
            Scenario::Fig2 => fig2(m.unwrap()),
            _ => fig3(),
        };
        for name in ["nbar_norm_src", "pe"] {
            // nbar is compared normalized (truncation shifts nbar(0) itself);
            // pe is small and compared raw.
            let (a, b): (Vec<f64>, Vec<f64>) = if name == "nbar_norm_src" {
                (normalized(&base.record, "nbar_total"), normalized(&wide.record, "nbar_total"))
            } else {
                (
                    base.record.series(name).unwrap().to_vec(),
                    wide.record.series(name).unwrap().to_vec(),
                )
            };
            for (x, y) in a.iter().zip(&b) {
                worst_cutoff = worst_cutoff.max((x - y).abs());
            }
        }
    }
    pass &= worst_cutoff < 1e-3;
    detail.push_str(&format!("cutoff doubling max shift {worst_cutoff:.1e}"));

    verdict("9 (trace/Hermiticity/positivity, dt and cutoff stability)", pass, &detail);
}

#[test]
fn criterion_10_determinism() {
    let dir = std::env::temp_dir().join(format!("darkfield-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let manifest = |prefix: &str| {
        format!(
            "fig2 modes=1 t_end=2 out={dir}/{prefix}_m1.csv\n\
             fig2 modes=2 t_end=2 out={dir}/{prefix}_m2.csv\n\
             figs1 out={dir}/{prefix}_ratios.csv\n\
             planck temperature=3500 out={dir}/{prefix}_planck.json format=json\n",
            dir = dir.display()
        )
    };
    let runs = |prefix: &str, workers: usize| {
        let configs = darkfield_cli::parse_sweep_manifest(&manifest(prefix)).unwrap();
        let report = darkfield_cli::run_sweep(&configs, workers).unwrap();
        assert_eq!(report.exit_code(), 0);
    };
    runs("a", 1);
    runs("b", 4);
    runs("c", 1);

    let mut pass = true;
    for name in ["m1.csv", "m2.csv", "ratios.csv", "planck.json"] {
        let a = std::fs::read(dir.join(format!("a_{name}"))).unwrap();
        let b = std::fs::read(dir.join(format!("b_{name}"))).unwrap();
        let c = std::fs::read(dir.join(format!("c_{name}"))).unwrap();
        pass &= a == b && b == c;
    }
    let _ = std::fs::remove_dir_all(&dir);
    verdict(
        "10 (repeated and parallel sweeps byte-identical)",
        pass,
        "three sweeps (workers 1, 4, 1) produced identical data files",
    );
}
