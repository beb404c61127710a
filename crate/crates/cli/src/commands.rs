use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use qconn::spatial::write_regional_csv;
use qconn::{
    all_pairs_strengths_with, clustering_coefficient, complete_graph, connectivity_report, erdos_renyi,
    hop_distance_pmf, load_network, mean_complete_homogeneous, mean_complete_uniform, mean_from_pmf, partition_regions,
    qcc, regional_qcm, sample_concurrences, waxman, ConcurrenceDistribution, ConnectivityReport, EnsembleEstimate,
    Error, MetricParams, NodeId, NodeSet, PathLengthPmf, Result, TableOptions, Topology, WaxmanParams, RNG_ALGORITHM,
};
use serde::Serialize;

use crate::config::{
    EnsembleConfig, Format, GenerateConfig, MetricsConfig, PmfConfig, RegionalConfig, SweepDist, TopologyKind,
    TopologyParams,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Names the file in IO errors, which `std::io::Error` does not.
pub fn at_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    at_path(path, File::create(path).map(BufWriter::new).map_err(Error::from))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    at_path(path, File::open(path).map(BufReader::new).map_err(Error::from))
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `# key: value` lines ahead of CSV data, ending with the resolved config.
fn write_comment_header(w: &mut dyn Write, command: &str, lines: &[String], config: &impl Serialize) -> Result<()> {
    writeln!(w, "# qconn {command} {VERSION}")?;
    for line in lines {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "# config: {}", serde_json::to_string(config)?)?;
    Ok(())
}

fn missing(what: &str) -> Error {
    Error::InvalidParameter(format!("{what} is required"))
}

fn build_topology(p: &TopologyParams, seed: u64) -> Result<Topology> {
    let nodes = p.nodes.ok_or_else(|| missing("nodes"))?;
    match p.kind {
        TopologyKind::Complete => complete_graph(nodes),
        TopologyKind::Er => erdos_renyi(nodes, p.avg_degree.ok_or_else(|| missing("avg_degree"))?, seed),
        TopologyKind::Waxman => {
            let mut params = WaxmanParams::with_radius(nodes, p.radius.unwrap_or(1000.0), seed);
            if let Some(alpha) = p.alpha {
                params.alpha = alpha;
            }
            if let Some(gamma) = p.gamma {
                params.gamma = gamma;
            }
            if let Some(photons) = p.photons {
                params.photons = photons;
            }
            waxman(&params)
        }
    }
}

pub fn generate(cfg: &GenerateConfig) -> Result<()> {
    let topology = build_topology(&cfg.topology_params(), cfg.seed)?;
    let network = sample_concurrences(&topology, &cfg.distribution, cfg.seed)?;
    let mut file = network.to_file();
    file.meta = Some(serde_json::json!({
        "generator": format!("qconn {VERSION}"),
        "rng": RNG_ALGORITHM,
        "seed": cfg.seed,
        "config": cfg,
    }));
    let mut w = open_output(&cfg.output)?;
    serde_json::to_writer(&mut w, &file)?;
    w.write_all(b"\n")?;
    w.flush()?;
    eprintln!(
        "rng: {RNG_ALGORITHM}, seed {}; {} nodes, {} edges",
        cfg.seed,
        network.node_count(),
        network.edge_count()
    );
    Ok(())
}

#[derive(Serialize)]
struct QccOutput {
    node: NodeId,
    qcc: f64,
    clustering: Option<f64>,
}

#[derive(Serialize)]
struct MetricsOutput<'a> {
    epsilon: f64,
    #[serde(flatten)]
    report: ConnectivityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    qcc: Option<QccOutput>,
    config: &'a MetricsConfig,
}

pub fn metrics(cfg: &MetricsConfig) -> Result<()> {
    let params = MetricParams::new(cfg.epsilon)?;
    let network = at_path(&cfg.network, load_network(&cfg.network))?;
    let subset = match &cfg.subset {
        Some(ids) => {
            let set = NodeSet::new(ids.clone())?;
            set.check_within(&network)?;
            set
        }
        None => network.all_nodes(),
    };
    let table = all_pairs_strengths_with(
        &network,
        &subset,
        TableOptions {
            retain_paths: cfg.strengths.is_some(),
        },
    )?;
    let report = connectivity_report(&table, &params)?;
    let qcc = match cfg.qcc {
        Some(node) => Some(QccOutput {
            node,
            qcc: qcc(&network, node, &params)?,
            clustering: clustering_coefficient(&network, node)?,
        }),
        None => None,
    };

    if let Some(path) = &cfg.strengths {
        table.write_csv(create(path)?)?;
    }

    let mut w = open_output(&cfg.output)?;
    match cfg.format {
        Format::Json => {
            let out = MetricsOutput {
                epsilon: cfg.epsilon,
                report,
                qcc,
                config: cfg,
            };
            serde_json::to_writer_pretty(&mut w, &out)?;
            w.write_all(b"\n")?;
        }
        Format::Csv => {
            write_comment_header(&mut w, "metrics", &[], cfg)?;
            let mut csv = csv::Writer::from_writer(&mut w);
            let mut header: Vec<&str> = ConnectivityReport::CSV_HEADER.to_vec();
            let mut row: Vec<String> = report.csv_record().to_vec();
            if let Some(q) = &qcc {
                header.extend(["qcc_node", "qcc", "clustering"]);
                row.extend([
                    q.node.to_string(),
                    q.qcc.to_string(),
                    q.clustering.map(|c| c.to_string()).unwrap_or_default(),
                ]);
            }
            csv.write_record(&header)?;
            csv.write_record(&row)?;
            csv.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn pmf(cfg: &PmfConfig) -> Result<()> {
    let network = at_path(&cfg.network, load_network(&cfg.network))?;
    let mut json = hop_distance_pmf(&network)?.to_json();
    json["meta"] = serde_json::json!({
        "generator": format!("qconn {VERSION}"),
        "config": cfg,
    });
    let mut w = open_output(&cfg.output)?;
    serde_json::to_writer_pretty(&mut w, &json)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn format_se(se: Option<f64>) -> String {
    se.map(|s| s.to_string()).unwrap_or_default()
}

fn closed_form(dist: &ConcurrenceDistribution, epsilon: f64) -> Result<EnsembleEstimate> {
    match *dist {
        ConcurrenceDistribution::Delta { c0 } => mean_complete_homogeneous(c0, epsilon),
        ConcurrenceDistribution::Uniform { mean, variance } => mean_complete_uniform(mean, variance, epsilon),
    }
}

pub fn ensemble(cfg: &EnsembleConfig) -> Result<()> {
    let grid = cfg.cbar_grid.values()?;
    if cfg.epsilon.is_empty() {
        return Err(missing("epsilon"));
    }
    let params = cfg
        .epsilon
        .iter()
        .map(|&e| MetricParams::new(e))
        .collect::<Result<Vec<_>>>()?;
    if cfg.auto && cfg.pmf.is_some() {
        return Err(Error::InvalidParameter("give either pmf or auto, not both".into()));
    }

    // One realization serves the whole grid; only edge values change.
    let realization = if cfg.auto || cfg.simulate {
        Some(build_topology(&cfg.topology_params(), cfg.seed)?)
    } else {
        None
    };
    let pmf = match (&cfg.pmf, &realization) {
        (Some(path), _) => Some(PathLengthPmf::from_json(serde_json::from_reader(open(path)?)?)?),
        (None, Some(topology)) if cfg.auto => Some(hop_distance_pmf(&topology.with_concurrence(1.0)?)?),
        _ if cfg.topology == TopologyKind::Complete => None,
        _ => {
            return Err(Error::InvalidParameter(
                "er and waxman sweeps need a PMF file (--pmf) or --auto".into(),
            ))
        }
    };

    let mut header = vec![format!("rng: {RNG_ALGORITHM}"), format!("seed: {}", cfg.seed)];
    if let Some(t) = &realization {
        header.push(format!(
            "realization: {} nodes, {} links",
            t.node_count(),
            t.link_count()
        ));
    }
    if let Some(p) = &pmf {
        header.push(format!(
            "pmf: ell_max {}, disconnected fraction {}",
            p.ell_max(),
            p.disconnected_fraction()
        ));
    }

    let mut w = open_output(&cfg.output)?;
    write_comment_header(&mut w, "ensemble", &header, cfg)?;
    let mut csv = csv::Writer::from_writer(&mut w);
    csv.write_record(["cbar", "sigma2", "epsilon", "qcm", "qcf", "qcm_se", "qcf_se", "method"])?;
    for &cbar in &grid {
        let dist = cfg.distribution.at(cbar)?;
        let sigma2 = match cfg.distribution {
            SweepDist::Delta => 0.0,
            SweepDist::Uniform { .. } => dist.effective_variance(),
        };
        let simulated = match (&realization, cfg.simulate) {
            (Some(topology), true) => {
                let net = sample_concurrences(topology, &dist, cfg.seed)?;
                Some(all_pairs_strengths_with(
                    &net,
                    &net.all_nodes(),
                    TableOptions { retain_paths: false },
                )?)
            }
            _ => None,
        };
        for p in &params {
            let eps = p.epsilon();
            let est = match &pmf {
                Some(pmf) => mean_from_pmf(pmf, &dist, eps, cfg.mc_samples, cfg.seed)?,
                None => closed_form(&dist, eps)?,
            };
            csv.write_record([
                cbar.to_string(),
                sigma2.to_string(),
                eps.to_string(),
                est.mean_qcm.to_string(),
                est.mean_qcf.to_string(),
                format_se(est.qcm_se),
                format_se(est.qcf_se),
                est.method.label().to_string(),
            ])?;
            if let Some(table) = &simulated {
                let r = connectivity_report(table, p)?;
                csv.write_record([
                    cbar.to_string(),
                    sigma2.to_string(),
                    eps.to_string(),
                    r.qcm.to_string(),
                    r.qcf.to_string(),
                    String::new(),
                    String::new(),
                    "simulation".to_string(),
                ])?;
            }
        }
    }
    csv.flush()?;
    drop(csv);
    w.flush()?;
    Ok(())
}

pub fn regional(cfg: &RegionalConfig) -> Result<()> {
    let params = MetricParams::new(cfg.epsilon)?;
    let network = at_path(&cfg.network, load_network(&cfg.network))?;
    let partition = partition_regions(&network, cfg.region_radius)?;
    let reports = regional_qcm(&network, &partition, &params)?;
    let mut w = open_output(&cfg.output)?;
    let lines = [format!(
        "regions: {}, nodes: {}",
        partition.region_count(),
        network.node_count()
    )];
    write_comment_header(&mut w, "regional", &lines, cfg)?;
    write_regional_csv(&reports, &mut w)?;
    w.flush()?;
    Ok(())
}
