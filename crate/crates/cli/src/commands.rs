use admg_learn::discovery::write_trace_csv;
use admg_learn::evaluation::{compare, random_graph_experiment, verma_recovery_experiment};
use admg_learn::penalty::graph_penalties;
use admg_learn::scoring::score_report;
use admg_learn::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::*;
use crate::files::*;
use crate::CliError;

pub fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Discover(a) => discover_cmd(a),
        Command::Check(a) => check(a),
        Command::Score(a) => score(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Project(a) => project(a),
        Command::Bench(BenchCommand::Verma(a)) => bench_verma(a),
        Command::Bench(BenchCommand::Random(a)) => bench_random(a),
    }
}

fn print_json(v: &serde_json::Value) {
    print!("{}", to_json_text(v));
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let graph = read_graph(&a.graph)?;
    if !graph.is_acyclic() {
        return Err(CliError::usage("the graph has a directed cycle"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let params = match &a.params {
        Some(path) => {
            let (p, names) = read_params(path)?;
            if names != graph.names() {
                return Err(CliError::usage("parameter names do not match the graph vertices"));
            }
            p
        }
        None => random_parameters(&graph, &mut rng)?,
    };
    let data = sample_data(&params, a.n, Some(graph.names().to_vec()), &mut rng)?;
    let mut buf = Vec::new();
    data.write_csv(&mut buf)?;
    write_atomic(&a.out, &buf)?;
    if let Some(path) = &a.params_out {
        write_atomic(path, params_json(&params, graph.names())?.as_bytes())?;
    }
    Ok(())
}

fn discover_cmd(a: DiscoverArgs) -> Result<(), CliError> {
    let data = read_dataset(&a.data)?;
    let hp = a.hyper.hyperparams(a.class.into());
    hp.validate()?;
    let res = discover(&data, &hp)?;
    write_atomic(&a.out, format!("{}\n", res.graph.to_json()).as_bytes())?;
    if let Some(path) = &a.trace {
        let mut buf = Vec::new();
        write_trace_csv(&res.trace, &mut buf)?;
        write_atomic(path, &buf)?;
    }
    if let Some(path) = &a.params_out {
        write_atomic(path, params_json(&res.params, data.names())?.as_bytes())?;
    }
    print_json(&json!({
        "class": hp.class.as_str(),
        "converged": res.converged,
        "h": res.h,
        "abic": res.abic,
        "bic": res.score,
        "restart": res.restart,
        "edges": res.graph.num_edges(),
    }));
    Ok(())
}

fn check(a: CheckArgs) -> Result<(), CliError> {
    let graph = read_graph(&a.graph)?;
    let props = check_properties(&graph)?;
    let pens = graph_penalties(&graph, &a.penalty.config())?;
    print_json(&json!({
        "acyclic": props.acyclic,
        "ancestral": props.ancestral,
        "arid": props.arid,
        "bow_free": props.bow_free,
        "penalties": pens,
    }));
    Ok(())
}

fn score(a: ScoreArgs) -> Result<(), CliError> {
    let data = read_dataset(&a.data)?;
    let params = match (&a.params, &a.graph) {
        (Some(path), None) => {
            let (p, names) = read_params(path)?;
            let perm = order_to_data(&names, &data, "parameter file")?;
            p.permuted(&perm)
        }
        (None, Some(path)) => {
            let graph = read_graph(path)?;
            let perm = order_to_data(graph.names(), &data, "graph")?;
            let graph = graph.permuted(&perm)?;
            fit_support(&data, &graph, 1e-8, 1000)?.state.params
        }
        _ => return Err(CliError::usage("give either --params or --graph with --fit")),
    };
    if a.fit != a.graph.is_some() {
        return Err(CliError::usage("--fit needs --graph"));
    }
    let cfg = ScoreConfig {
        lambda: a.lambda,
        c_sharpness: a.c_sharpness.unwrap_or_else(|| (data.n() as f64).ln()),
        zero_tol: a.zero_tol,
    };
    let report = score_report(&data, &params, &cfg)?;
    if let Some(path) = &a.params_out {
        write_atomic(path, params_json(&params, data.names())?.as_bytes())?;
    }
    print_json(&serde_json::to_value(report).expect("report serializes"));
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let pred = read_graph(&a.pred)?;
    let truth = read_graph(&a.truth)?;
    let report = compare(&pred, &truth)?;
    print_json(&serde_json::to_value(report).expect("report serializes"));
    Ok(())
}

fn project(a: ProjectArgs) -> Result<(), CliError> {
    let graph = read_graph(&a.graph)?;
    let mag = mag_projection(&graph)?;
    let text = format!("{}\n", mag.to_json());
    match &a.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bench_verma(a: BenchVermaArgs) -> Result<(), CliError> {
    let hp = a.hyper.hyperparams(a.class.into());
    hp.validate()?;
    let report = verma_recovery_experiment(&a.n, a.seeds, &hp)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    write_atomic(&a.out, &buf)?;
    print_json(&serde_json::to_value(&report.summaries).expect("summaries serialize"));
    Ok(())
}

fn bench_random(a: BenchRandomArgs) -> Result<(), CliError> {
    let hp = a.hyper.hyperparams(a.class.into());
    hp.validate()?;
    let report = random_graph_experiment(a.d, a.graphs, a.n, &hp)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    write_atomic(&a.out, &buf)?;
    let names = ["skeleton_tpr", "skeleton_fdr", "arrowhead_tpr", "arrowhead_fdr", "tail_tpr", "tail_fdr"];
    let mean: serde_json::Map<String, serde_json::Value> =
        names.iter().zip(report.mean).map(|(k, v)| (k.to_string(), json!(v))).collect();
    print_json(&json!({ "class": hp.class.as_str(), "d": a.d, "n": a.n, "graphs": a.graphs, "failures": report.failures, "mean": mean }));
    Ok(())
}
