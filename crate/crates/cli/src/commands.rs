use std::path::Path;

use rhostar::analyze::{
    cell_svg, cell_weights_component, cell_weights_overall, component_gridlines, curves_svg, frechet_curves,
    gen_demo_data, scatter_svg, weights_component, weights_csv, weights_overall, CurveSign,
};
use rhostar::dist::{discretize, NamedDist};
use rhostar::eigen::{eigensystem_tridiag, eigenvalues_tridiag};
use rhostar::estimate::{component_correlations, estimate_kappa, rho_star, Mode, PairedSample};
use rhostar::grade::{grade_transform, ksample_kappa, GradeScale};
use rhostar::infer::{asymptotic_pvalue, component_tests, permutation_test, Statistic};

use crate::error::{CliError, CliResult};
use crate::input::{load_ksample, load_sample, parse_table};
use crate::report::{
    emit, ComponentRow, EigenReport, FrechetReport, GroupRow, KSampleReport, Report, TableSummary, WeightsSummary,
};
use crate::{Command, MethodArg, SampleArgs, TestArgs};

const MIN_REPLICATES: u64 = 99;
const MIN_DRAWS: usize = 1000;
const DEFAULT_MAX_COMPONENT: usize = 10;

pub fn run(command: &Command, out: Option<&Path>) -> CliResult<()> {
    match command {
        Command::Test { sample, method, test } => {
            let report = sample_report("test", sample, &prepare(sample)?, Some((*method, test)))?;
            Ok(emit(&report, out)?)
        }
        Command::Components { sample } => {
            Ok(emit(&sample_report("components", sample, &prepare(sample)?, None)?, out)?)
        }
        Command::Table { sample, method, test } => {
            let table = parse_table(&sample.input)?;
            let mut s = table.to_sample()?;
            if let Some(f) = sample.grade {
                s = grade_transform(&s, &GradeScale::new(f), &GradeScale::new(f))?;
            }
            let mut report = sample_report("table", sample, &s, method.map(|m| (m, test)))?;
            let (rows, cols) = table.shape();
            report.table = Some(TableSummary {
                rows,
                cols,
                row_labels: table.row_labels.clone(),
                col_labels: table.col_labels.clone(),
                counts: table.counts.clone(),
            });
            Ok(emit(&report, out)?)
        }
        Command::Weights { sample, k, l, plot, csv } => {
            let report = weights_report(sample, k.zip(*l), plot.as_deref(), csv.as_deref())?;
            Ok(emit(&report, out)?)
        }
        Command::Eigen { dist, t, functions } => {
            let d = discretize(&NamedDist::standard(*dist), *t)?;
            let lambda = eigenvalues_tridiag(&d)?;
            let sum: f64 = lambda.iter().sum();
            let eigenfunctions = if *functions > 0 {
                let sys = eigensystem_tridiag(&d)?;
                sys.eigenfunctions().iter().take(*functions).cloned().collect()
            } else {
                Vec::new()
            };
            let report = EigenReport {
                command: "eigen",
                dist: dist.name().to_owned(),
                t: *t,
                sum_lambda: sum,
                sum_lambda_sq: lambda.iter().map(|v| v * v).sum(),
                lambda: lambda.iter().map(|v| v / sum).collect(),
                eigenvalues: lambda,
                support: d.support().to_vec(),
                eigenfunctions,
            };
            Ok(emit(&report, out)?)
        }
        Command::Ksample { input, grade, replicates, seed } => {
            let data = load_ksample(input)?;
            let scale = grade.map(GradeScale::new);
            let kappa = ksample_kappa(&data, scale.as_ref())?;
            let mut warnings = Vec::new();
            let test = match seed {
                Some(seed) => {
                    check_replicates(*replicates)?;
                    let mut pairs = data.to_sample()?;
                    if let Some(sc) = &scale {
                        let y = rhostar::grade::grade_values(pairs.y(), sc)?;
                        pairs = pairs.with_values(pairs.x().to_vec(), y)?;
                    }
                    Some(permutation_test(&pairs, Statistic::KappaV, *replicates, *seed)?)
                }
                None => {
                    warnings.push("no --seed given; permutation test skipped".to_owned());
                    None
                }
            };
            let report = KSampleReport {
                command: "ksample",
                input: input.clone(),
                n: data.total(),
                grade: grade.map(|g| g.name().to_owned()),
                groups: data
                    .scores()
                    .iter()
                    .zip(data.groups())
                    .map(|(&score, g)| GroupRow { score, size: g.len() })
                    .collect(),
                kappa,
                p_value: test.as_ref().map(|t| t.p_value),
                method: test.as_ref().map(|_| "permutation".to_owned()),
                replicates: test.as_ref().map(|t| t.replicates),
                seed: *seed,
                warnings,
            };
            Ok(emit(&report, out)?)
        }
        Command::Frechet { k, l, sign, plot } => {
            if *k == 0 || *l == 0 {
                return Err(CliError::input("k and l must be at least 1"));
            }
            let segments = frechet_curves(*k, *l, *sign);
            if let Some(p) = plot {
                std::fs::write(p, curves_svg(&segments))?;
            }
            let report = FrechetReport {
                command: "frechet",
                k: *k,
                l: *l,
                sign: if *sign == CurveSign::Plus { "+" } else { "-" }.to_owned(),
                segments,
                plot: plot.as_ref().map(|p| p.display().to_string()),
            };
            Ok(emit(&report, out)?)
        }
        Command::Demo { kind, n, seed } => {
            let s = gen_demo_data(*kind, *n, *seed)?;
            let mut csv = String::from("x,y\n");
            for (x, y) in s.x().iter().zip(s.y()) {
                csv.push_str(&format!("{x},{y}\n"));
            }
            match out {
                Some(p) => std::fs::write(p, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}

fn check_replicates(b: u64) -> CliResult<()> {
    if b < MIN_REPLICATES {
        return Err(CliError::input(format!("permutation replicates must be at least {MIN_REPLICATES}")));
    }
    Ok(())
}

/// Loads the sample and applies the grade transform when requested.
fn prepare(args: &SampleArgs) -> CliResult<PairedSample> {
    let s = load_sample(&args.input, args.table, args.seed)?;
    match args.grade {
        Some(f) => Ok(grade_transform(&s, &GradeScale::new(f), &GradeScale::new(f))?),
        None => Ok(s),
    }
}

fn sample_report(
    command: &'static str,
    args: &SampleArgs,
    s: &PairedSample,
    test: Option<(MethodArg, &TestArgs)>,
) -> CliResult<Report> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::input("alpha must lie in (0, 1)"));
    }
    if let Some((method, t)) = test {
        if args.seed.is_none() {
            return Err(CliError::input("--seed is required for randomized tests"));
        }
        match method {
            MethodArg::Perm => check_replicates(t.replicates)?,
            MethodArg::Asymp if t.draws < MIN_DRAWS => {
                return Err(CliError::input(format!("asymptotic draws must be at least {MIN_DRAWS}")))
            }
            MethodArg::Asymp if t.mixture_terms == 0 => return Err(CliError::input("mixture terms must be positive")),
            MethodArg::Asymp => {}
        }
    }
    let ca = component_correlations(
        s,
        Some(args.max_k.unwrap_or(DEFAULT_MAX_COMPONENT)),
        Some(args.max_l.unwrap_or(DEFAULT_MAX_COMPONENT)),
    )?;
    let tests = component_tests(&ca, s.len(), args.alpha)?;
    let components = ca
        .components
        .iter()
        .zip(&tests)
        .map(|(c, t)| ComponentRow {
            k: c.k,
            l: c.l,
            lambda: c.lambda,
            mu: c.mu,
            rho: c.rho,
            raw_p: t.raw_p,
            adjusted_p: t.adjusted_p,
            significant: t.significant,
        })
        .collect();
    let mut warnings = ca.warnings.clone();
    let mut report = Report {
        command,
        input: args.input.clone(),
        n: s.len(),
        kappa_v: estimate_kappa(s, Mode::V)?.value,
        kappa_u: estimate_kappa(s, Mode::U)?.value,
        rho_star: rho_star(s, Mode::V)?,
        rho_star_u: rho_star(s, Mode::U)?,
        grade: args.grade.map(|g| g.name().to_owned()),
        statistic: None,
        p_value: None,
        method: None,
        replicates: None,
        exhaustive: None,
        seed: None,
        sum_lambda: ca.x_system.trace(),
        sum_mu: ca.y_system.trace(),
        components,
        warnings: Vec::new(),
        table: None,
        weights: None,
    };
    if let Some((method, t)) = test {
        let seed = args.seed.expect("checked above");
        let result = match method {
            MethodArg::Perm => {
                report.statistic = Some(statistic_name(t.statistic).to_owned());
                permutation_test(s, t.statistic, t.replicates, seed)?
            }
            MethodArg::Asymp => {
                let mode = if t.statistic == Statistic::KappaU { Mode::U } else { Mode::V };
                report.statistic = Some(if mode == Mode::U { "kappa_u" } else { "kappa_v" }.to_owned());
                let (lambda, mu) = (ca.x_system.eigenvalues(), ca.y_system.eigenvalues());
                if lambda.len() > t.mixture_terms || mu.len() > t.mixture_terms {
                    warnings
                        .push(format!("asymptotic mixture truncated to {} eigenvalues per margin", t.mixture_terms));
                }
                let lambda = &lambda[..lambda.len().min(t.mixture_terms)];
                let mu = &mu[..mu.len().min(t.mixture_terms)];
                let kappa = estimate_kappa(s, mode)?.value;
                asymptotic_pvalue(s.len(), kappa, lambda, mu, mode, t.draws, seed)?
            }
        };
        report.p_value = Some(result.p_value);
        report.method = Some(
            match method {
                MethodArg::Perm => "permutation",
                MethodArg::Asymp => "asymptotic",
            }
            .to_owned(),
        );
        report.replicates = Some(result.replicates);
        report.exhaustive = Some(result.exhaustive);
        report.seed = Some(seed);
    }
    report.warnings = warnings;
    Ok(report)
}

fn statistic_name(s: Statistic) -> &'static str {
    match s {
        Statistic::KappaV => "kappa_v",
        Statistic::KappaU => "kappa_u",
        Statistic::RhoStarV => "rho_star_v",
    }
}

fn weights_report(
    args: &SampleArgs,
    component: Option<(usize, usize)>,
    plot: Option<&Path>,
    csv: Option<&Path>,
) -> CliResult<Report> {
    let s = prepare(args)?;
    let mut report = sample_report("weights", args, &s, None)?;
    let cells = args.table || s.is_categorical();
    let summary = if cells {
        let cw = match component {
            Some((k, l)) => cell_weights_component(&s, k, l)?,
            None => cell_weights_overall(&s)?,
        };
        if let Some(p) = plot {
            std::fs::write(p, cell_svg(&cw))?;
        }
        if let Some(p) = csv {
            let (rows, cols) = cw.shape();
            let x: Vec<f64> = (0..rows * cols).map(|i| cw.row_values[i / cols]).collect();
            let y: Vec<f64> = (0..rows * cols).map(|i| cw.col_values[i % cols]).collect();
            std::fs::write(p, weights_csv(&x, &y, &cw.values)?)?;
        }
        WeightsSummary {
            kind: if component.is_some() { "component" } else { "overall" }.to_owned(),
            k: component.map(|c| c.0),
            l: component.map(|c| c.1),
            normalizer: cw.normalizer,
            total: cw.total(),
            cells: true,
            values: cw.values.clone(),
            plot: plot.map(|p| p.display().to_string()),
            csv: csv.map(|p| p.display().to_string()),
        }
    } else {
        let (w, grid) = match component {
            Some((k, l)) => (weights_component(&s, k, l)?, Some(component_gridlines(&s, k, l)?)),
            None => (weights_overall(&s)?, None),
        };
        if let Some(p) = plot {
            std::fs::write(p, scatter_svg(s.x(), s.y(), &w.values, grid.as_ref())?)?;
        }
        if let Some(p) = csv {
            std::fs::write(p, weights_csv(s.x(), s.y(), &w.values)?)?;
        }
        WeightsSummary {
            kind: if component.is_some() { "component" } else { "overall" }.to_owned(),
            k: component.map(|c| c.0),
            l: component.map(|c| c.1),
            normalizer: w.normalizer,
            total: w.mean(),
            cells: false,
            values: w.values.clone(),
            plot: plot.map(|p| p.display().to_string()),
            csv: csv.map(|p| p.display().to_string()),
        }
    };
    report.weights = Some(summary);
    Ok(report)
}
