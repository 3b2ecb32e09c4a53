use pqsi_core::identify::{phase_budgets, Mode};
use pqsi_core::measure::swap_accept_prob;
use pqsi_harness::sweep::{cell_outcomes, cells, theory_for, thread_pool};
use pqsi_harness::{run_sweep, wilson_interval, Experiment, ExperimentConfig, HarnessError};

fn config(text: &str) -> ExperimentConfig {
    text.parse().unwrap()
}

#[test]
fn same_config_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let text = "experiment = im_sweep\npurities = 0.9, 0.7, 0.6\ndims = 2, 4\nbudgets = 200, 400\n\
                m_policy = fixed:2\ntrials = 40\nseed = 3\n";
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run_sweep(&config(text)).unwrap().write(&a).unwrap();
    let mut cfg = config(text);
    cfg.workers = 4;
    run_sweep(&cfg).unwrap().write(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let timing = std::fs::read_to_string(dir.path().join("a.csv.timing.csv")).unwrap();
    assert!(timing.starts_with("cell,experiment,d,N,wallclock_ms\n"));
    assert_eq!(timing.lines().count(), 5);
}

#[test]
fn growing_trials_keeps_the_prefix() {
    for text in [
        "experiment = cm_sweep\npurities = 0.9, 0.8, 0.7\ndims = 2\nbudgets = 60\ntrials = 300\nseed = 11\n",
        "experiment = im_sweep\npurities = 0.9, 0.6\ndims = 4\nbudgets = 80\nm_policy = fixed:2\ntrials = 300\nseed = 11\n",
        "experiment = lowerbound_sweep\npurities = 0.9, 0.6\ndims = 4\nbudgets = 40\ntrials = 300\nseed = 11\n",
    ] {
        let small = config(text);
        let mut large = small.clone();
        large.trials = 600;
        let pool = thread_pool(2).unwrap();
        let cell = cells(&small).unwrap()[0];
        let a = cell_outcomes(&small, cell, &pool).unwrap();
        let b = cell_outcomes(&large, cell, &pool).unwrap();
        assert_eq!(a.len(), 300);
        assert_eq!(&b[..300], &a[..]);
    }
}

#[test]
fn theory_column_recomputes_from_row() {
    let purities = [0.95, 0.75, 0.6, 0.5];
    let cases = [
        ("cm_sweep", Experiment::CmSweep, ""),
        ("im_sweep", Experiment::ImSweep, "m_policy = fixed:2\n"),
        ("baseline_sweep", Experiment::BaselineSweep, "mode = cm\n"),
        ("lowerbound_sweep", Experiment::LowerboundSweep, ""),
    ];
    for (name, exp, extra) in cases {
        let text = format!(
            "experiment = {name}\npurities = 0.95, 0.75, 0.6, 0.5\ndims = 2, 4\nbudgets = 100, 300\n\
             trials = 5\nseed = 2\n{extra}"
        );
        let cfg = config(&text);
        let csv_text = run_sweep(&cfg).unwrap().to_csv().unwrap();
        let body: String = csv_text.lines().skip(1).map(|l| format!("{l}\n")).collect();
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let mut rows = 0;
        for rec in reader.records() {
            let rec = rec.unwrap();
            let d: usize = rec[1].parse().unwrap();
            let k: usize = rec[2].parse().unwrap();
            let n: u64 = rec[3].parse().unwrap();
            let theory: f64 = rec[10].parse().unwrap();
            assert_eq!(k, purities.len());
            let (expect, kind) = theory_for(exp, cfg.mode, &purities, d, n);
            assert_eq!(theory, expect, "{name} d={d} N={n}");
            assert_eq!(&rec[11], kind);
            let (err, low, high): (f64, f64, f64) =
                (rec[7].parse().unwrap(), rec[8].parse().unwrap(), rec[9].parse().unwrap());
            assert!(low <= err && err <= high);
            let successes: u64 = rec[6].parse().unwrap();
            assert!(successes <= rec[5].parse::<u64>().unwrap());
            rows += 1;
        }
        assert_eq!(rows, 4);
    }
}

#[test]
fn two_arm_cm_cell_matches_binomial_prediction() {
    // Purity 0.6 at d=2 keeps the error visible at this small budget.
    let cfg = config("experiment = cm_sweep\npurities = 1.0, 0.6\ndims = 2\nbudgets = 40\ntrials = 1000\nseed = 7\n");
    let row = run_sweep(&cfg).unwrap().rows.remove(0);
    let n1 = phase_budgets(40, 2, Mode::Coherent).unwrap().n_k[0] as i32;
    // The pure arm always accepts; the mixed arm errs only by accepting every time.
    let exact = swap_accept_prob(0.6).unwrap().powi(n1);
    let (low, high) = wilson_interval(row.trials - row.successes, row.trials, 0.99).unwrap();
    assert!(low <= exact && exact <= high, "exact {exact} outside [{low}, {high}]");
    assert_eq!(row.mean_copies, Some((2 * 2 * n1) as f64));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let cfg = config("experiment = cm_sweep\npreset = two-arm\nbudgets = 100\ntrials = 1\n");
    let result = run_sweep(&cfg).unwrap();
    let err = result.write(std::path::Path::new("/nonexistent-dir/out.csv")).unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }));
}

#[test]
fn ensemble_file_source() {
    use pqsi_core::qcore::{alpha_from_purity, depolarized_state, sample_haar_unitary, write_ensemble};
    use pqsi_core::stream::StreamKey;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("states.bin");
    let mut rng = StreamKey::new(1).rng();
    let states: Vec<_> = [0.5, 0.95, 0.7]
        .iter()
        .map(|&z| {
            depolarized_state(&sample_haar_unitary(4, &mut rng).unwrap(), alpha_from_purity(z, 4).unwrap()).unwrap()
        })
        .collect();
    write_ensemble(&path, &states).unwrap();
    let cfg = config(&format!(
        "experiment = cm_sweep\nensemble_file = {}\nbudgets = 400\ntrials = 50\nseed = 1\n",
        path.display()
    ));
    let row = run_sweep(&cfg).unwrap().rows.remove(0);
    assert_eq!((row.d, row.k), (4, Some(3)));
}
