use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use ncsvm::bench::{best_row, full_grid, grid_search, parse_grid, write_bench_csv, BenchRow};
use ncsvm::data::{map_labels, read_records_file, write_libsvm};
use ncsvm::{fit, read_libsvm_file, stratified_split, Dataset, LinearModel, Result, SplitSpec};

use crate::{BenchArgs, PredictArgs, TrainArgs};

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn load_pair(data: &Path, test: Option<&Path>) -> Result<(Dataset, Option<Dataset>)> {
    let train = read_libsvm_file(data, None)?;
    let Some(test) = test else {
        return Ok((train, None));
    };
    let test = read_libsvm_file(test, None)?;
    // Align widths so trailing all-zero features on either side don't matter.
    let d = train.n_features().max(test.n_features());
    Ok((train.with_n_features(d)?, Some(test.with_n_features(d)?)))
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let cfg = a.solver.config()?;
    let (mut train, mut test) = load_pair(&a.data, a.test_data.as_deref())?;
    fs::create_dir_all(&a.out_dir)?;
    if let Some(fraction) = a.split_fraction {
        let (tr, te) = stratified_split(&train, &SplitSpec::new(fraction, cfg.seed)?)?;
        let mut out = create(&a.out_dir.join("test_split.libsvm"))?;
        write_libsvm(&te, &mut out)?;
        out.flush()?;
        train = tr;
        test = Some(te);
    }

    let report = fit(&train, &cfg)?;
    let model_path = a
        .model
        .clone()
        .unwrap_or_else(|| a.out_dir.join("model.json"));
    report.model.save(&model_path)?;
    let mut trace = create(&a.out_dir.join("trace.csv"))?;
    report.write_trace_csv(&mut trace)?;
    trace.flush()?;

    let train_acc = report.model.accuracy(&train)?;
    let test_acc = test
        .as_ref()
        .map(|t| report.model.accuracy(t))
        .transpose()?;
    let mut json = serde_json::to_value(&report)?;
    json["n_samples"] = train.n_samples().into();
    json["n_features"] = train.n_features().into();
    json["train_accuracy"] = train_acc.into();
    json["test_accuracy"] = test_acc.into();
    json["coefficient_sparsity"] = serde_json::to_value(report.model.coefficient_sparsity())?;
    json["z_sparsity"] = serde_json::to_value(report.sparse_model()?.coefficient_sparsity())?;
    json["total_seconds"] = report.total_seconds().into();
    write_json(&a.out_dir.join("report.json"), &json)?;

    println!(
        "{} iterations ({:?}), objective {:.6}, train accuracy {:.4}",
        report.iterations, report.terminated_by, report.final_objective, train_acc
    );
    if let Some(acc) = test_acc {
        println!("test accuracy {acc:.4}");
    }
    println!(
        "precompute {:.4}s, iterations {:.4}s",
        report.precompute_seconds, report.iterate_seconds
    );
    Ok(())
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let model = LinearModel::load(&a.model)?;
    let records = read_records_file(&a.data, None)?;
    let width = model.dim().max(records.features.n_cols());
    let features = records.features.with_n_cols(width)?;
    let preds = model.predict_all(&features)?;
    fs::create_dir_all(&a.out_dir)?;
    let mut out = create(&a.out_dir.join("predictions.txt"))?;
    for p in &preds {
        writeln!(out, "{}", if *p > 0.0 { "+1" } else { "-1" })?;
    }
    out.flush()?;
    if let Some(raw) = records.raw_labels {
        let labels = map_labels(&raw)?;
        let hits = preds.iter().zip(&labels).filter(|(p, l)| p == l).count();
        println!("accuracy {}", hits as f64 / labels.len().max(1) as f64);
    }
    Ok(())
}

pub fn bench(a: &BenchArgs) -> Result<()> {
    let cfg = a.solver.config()?;
    let grid = match &a.grid {
        Some(text) => parse_grid(text)?,
        None => full_grid(),
    };
    let (train, test) = match load_pair(&a.data, a.test_data.as_deref())? {
        (train, Some(test)) => (train, test),
        (all, None) => stratified_split(&all, &SplitSpec::new(a.split_fraction, cfg.seed)?)?,
    };
    let rows = grid_search(&train, &test, &cfg, &grid);
    fs::create_dir_all(&a.out_dir)?;
    let mut out = create(&a.out_dir.join("bench.csv"))?;
    write_bench_csv(&rows, &mut out)?;
    out.flush()?;

    println!(
        "{} train / {} test samples, penalty {} (lambda {}, theta {})",
        train.n_samples(),
        test.n_samples(),
        cfg.penalty.kind,
        cfg.penalty.lambda,
        cfg.penalty.theta
    );
    println!(
        "{:>6} {:>6} {:>10} {:>13} {:>13} {:>13} {:>9}",
        "rho1", "rho2", "iterations", "precompute_s", "iteration_s", "running_s", "accuracy"
    );
    for r in &rows {
        print_row(r);
    }
    match best_row(&rows) {
        Some(b) => {
            print!("best: ");
            print_row(b);
        }
        None => println!("best: none (every grid point failed)"),
    }
    Ok(())
}

fn print_row(r: &BenchRow) {
    match (
        &r.error,
        r.accuracy,
        r.iterations,
        r.precompute_seconds,
        r.iterate_seconds,
    ) {
        (None, Some(acc), Some(it), Some(pre), Some(iter)) => println!(
            "{:>6} {:>6} {:>10} {:>13.4} {:>13.4} {:>13.4} {:>8.2}%",
            r.rho1,
            r.rho2,
            it,
            pre,
            iter,
            pre + iter,
            acc * 100.0
        ),
        (err, ..) => println!(
            "{:>6} {:>6} failed: {}",
            r.rho1,
            r.rho2,
            err.as_deref().unwrap_or("unknown error")
        ),
    }
}
