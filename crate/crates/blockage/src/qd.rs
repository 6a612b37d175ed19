//! qd-realization scenario folders.
//!
//! Layout read and written:
//!
//! ```text
//! Input/paraCfgCurrent.txt                          TotalTimeDuration, NumberOfTimeDivisions
//! Output/Ns3/QdFiles/Tx<i>Rx<j>.txt                 per step: N, then 7 rows of N values
//! Output/Visualizer/MpcCoordinates/MpcTx<i>Rx<j>Refl<k>Trc<t>.csv
//! Output/Visualizer/NodePositions/NodePositionsTx<i>.csv (and Rx<i>)
//! ```
//!
//! The seven rows are delay (s), path gain (dB), phase (rad), AoD elevation,
//! AoD azimuth, AoA elevation, AoA azimuth (degrees). Rays within a step are
//! ordered by reflection order, and the coordinate files of one step list the
//! same rays order by order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use blockage_core::geometry::{Point3, Vec3};
use blockage_core::trace::{angles_of_arrival, angles_of_departure, ChannelTrace, NodeId, PairId, Ray};
use log::warn;

use crate::error::{Error, Result};

const QD_DIR: &str = "Output/Ns3/QdFiles";
const MPC_DIR: &str = "Output/Visualizer/MpcCoordinates";
const NODE_DIR: &str = "Output/Visualizer/NodePositions";
const PARA_CFG: &str = "Input/paraCfgCurrent.txt";

/// Default export floor: weaker rays are not written.
pub const DEFAULT_EXPORT_FLOOR_DB: f64 = -500.0;

/// Sampling period used when the scenario does not declare one.
pub const FALLBACK_TIMESTEP: f64 = 1.0;

struct RawRay {
    delay: f64,
    gain: f64,
    phase: f64,
    line: usize,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_prefixed(name: &str, parts: &[&str], suffix: &str) -> Option<Vec<u32>> {
    let mut rest = name.strip_suffix(suffix)?;
    let mut out = Vec::with_capacity(parts.len());
    for (i, p) in parts.iter().enumerate() {
        rest = rest.strip_prefix(p)?;
        let end = if i + 1 < parts.len() {
            rest.find(parts[i + 1])?
        } else {
            rest.len()
        };
        let (num, tail) = rest.split_at(end);
        if num.is_empty() || !num.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        out.push(num.parse().ok()?);
        rest = tail;
    }
    rest.is_empty().then_some(out)
}

fn list_dir(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if let Ok(name) = entry.file_name().into_string() {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

fn parse_row(path: &Path, line_no: usize, line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::format(path, Some(line_no), format!("not a number: {s:?}")))
        })
        .collect()
}

fn parse_qd_file(path: &Path) -> Result<Vec<Vec<RawRay>>> {
    let text = read(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut steps = Vec::new();
    while let Some((line_no, header)) = lines.next() {
        let n: usize = header
            .parse()
            .map_err(|_| Error::format(path, Some(line_no), format!("expected a ray count, found {header:?}")))?;
        let mut rows = Vec::with_capacity(7);
        for k in 0..if n > 0 { 7 } else { 0 } {
            let Some((row_no, line)) = lines.next() else {
                return Err(Error::format(path, None, format!("truncated block starting at line {line_no}")));
            };
            let values = parse_row(path, row_no, line)?;
            if values.len() != n {
                return Err(Error::format(
                    path,
                    Some(row_no),
                    format!("row {} of block has {} values, expected {n}", k + 1, values.len()),
                ));
            }
            rows.push((row_no, values));
        }
        let rays = (0..n)
            .map(|r| RawRay {
                delay: rows[0].1[r],
                gain: rows[1].1[r],
                phase: rows[2].1[r],
                line: rows[0].0,
            })
            .collect();
        steps.push(rays);
    }
    Ok(steps)
}

fn parse_points(path: &Path, line_no: usize, line: &str) -> Result<Vec<Point3>> {
    let v = parse_row(path, line_no, line)?;
    if v.len() % 3 != 0 || v.is_empty() {
        return Err(Error::format(path, Some(line_no), "coordinate count is not a multiple of 3"));
    }
    Ok(v.chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect())
}

fn parse_timestep(dir: &Path) -> Result<f64> {
    let path = dir.join(PARA_CFG);
    if !path.exists() {
        warn!("{} not found, assuming a {FALLBACK_TIMESTEP} s time step", path.display());
        return Ok(FALLBACK_TIMESTEP);
    }
    let text = read(&path)?;
    let mut duration = None;
    let mut divisions = None;
    for (i, line) in text.lines().enumerate() {
        let mut it = line.split([',', '\t', ' ']).filter(|s| !s.is_empty());
        let (Some(key), Some(value)) = (it.next(), it.next()) else {
            continue;
        };
        let slot = match key.to_ascii_lowercase().as_str() {
            "totaltimeduration" => &mut duration,
            "numberoftimedivisions" => &mut divisions,
            _ => continue,
        };
        let v: f64 = value
            .parse()
            .map_err(|_| Error::format(&path, Some(i + 1), format!("not a number: {value:?}")))?;
        *slot = Some(v);
    }
    match (duration, divisions) {
        (Some(d), Some(n)) if d > 0.0 && n >= 1.0 => Ok(round_significant(d / n, 12)),
        (Some(_), Some(_)) => Err(Error::format(&path, None, "time duration and divisions must be positive")),
        _ => {
            warn!("{} declares no time base, assuming a {FALLBACK_TIMESTEP} s time step", path.display());
            Ok(FALLBACK_TIMESTEP)
        }
    }
}

fn round_significant(x: f64, digits: usize) -> f64 {
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Read a scenario folder.
pub fn import_scenario(dir: &Path) -> Result<ChannelTrace> {
    fs::metadata(dir).map_err(|e| Error::io(dir, e))?;
    let qd_dir = dir.join(QD_DIR);
    if !qd_dir.is_dir() {
        return Err(Error::format(&qd_dir, None, "missing channel file directory"));
    }
    let mut qd_files: BTreeMap<PairId, PathBuf> = BTreeMap::new();
    for name in list_dir(&qd_dir)? {
        if let Some(ids) = parse_prefixed(&name, &["Tx", "Rx"], ".txt") {
            qd_files.insert((ids[0], ids[1]), qd_dir.join(name));
        }
    }
    if qd_files.is_empty() {
        return Err(Error::format(&qd_dir, None, "no Tx<i>Rx<j>.txt files"));
    }

    // (tx, rx, step) -> reflection order -> file
    let mpc_dir = dir.join(MPC_DIR);
    let mut mpc: BTreeMap<(NodeId, NodeId, usize), BTreeMap<u32, PathBuf>> = BTreeMap::new();
    if mpc_dir.is_dir() {
        for name in list_dir(&mpc_dir)? {
            if let Some(ids) = parse_prefixed(&name, &["MpcTx", "Rx", "Refl", "Trc"], ".csv") {
                mpc.entry((ids[0], ids[1], ids[3] as usize))
                    .or_default()
                    .insert(ids[2], mpc_dir.join(name));
            }
        }
    }

    let mut pairs = BTreeMap::new();
    let mut num_steps = None;
    for (&(tx, rx), path) in &qd_files {
        let raw = parse_qd_file(path)?;
        match num_steps {
            None => num_steps = Some(raw.len()),
            Some(n) if n != raw.len() => {
                return Err(Error::format(path, None, format!("{} time steps, other pairs have {n}", raw.len())));
            }
            _ => {}
        }
        let mut steps = Vec::with_capacity(raw.len());
        for (t, rays) in raw.into_iter().enumerate() {
            let paths = read_step_paths(mpc.get(&(tx, rx, t)), tx, rx, t, rays.len(), &mpc_dir)?;
            let mut out = Vec::with_capacity(rays.len());
            for (r, vertices) in rays.into_iter().zip(paths) {
                let ray = Ray::new(r.delay, r.gain, r.phase, vertices)
                    .map_err(|e| Error::format(path, Some(r.line), format!("step {t}: {e}")))?;
                if !ray.delay_consistent(1e-6) {
                    warn!("{}: step {t}: delay disagrees with the ray geometry", path.display());
                }
                out.push(ray);
            }
            steps.push(out);
        }
        pairs.insert((tx, rx), steps);
    }
    let num_steps = num_steps.unwrap_or(0);
    if num_steps == 0 {
        return Err(Error::format(&qd_dir, None, "channel files contain no time steps"));
    }

    let node_positions = read_node_positions(dir, &pairs, num_steps)?;
    let timestep = parse_timestep(dir)?;
    ChannelTrace::new(node_positions, pairs, timestep).map_err(|e| Error::format(dir, None, e))
}

fn read_step_paths(
    files: Option<&BTreeMap<u32, PathBuf>>,
    tx: NodeId,
    rx: NodeId,
    step: usize,
    expected: usize,
    mpc_dir: &Path,
) -> Result<Vec<Vec<Point3>>> {
    if expected == 0 {
        return Ok(Vec::new());
    }
    let Some(files) = files else {
        return Err(Error::format(
            mpc_dir,
            None,
            format!("missing ray coordinate files for pair Tx{tx}Rx{rx} at step {step}"),
        ));
    };
    let mut paths = Vec::with_capacity(expected);
    let mut last = None;
    for path in files.values() {
        for (i, line) in read(path)?.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            paths.push(parse_points(path, i + 1, line)?);
        }
        last = Some(path);
    }
    if paths.len() != expected {
        return Err(Error::format(
            last.map_or(mpc_dir, |p| p.as_path()),
            None,
            format!(
                "pair Tx{tx}Rx{rx} step {step}: {} coordinate rows for {expected} rays",
                paths.len()
            ),
        ));
    }
    Ok(paths)
}

fn read_node_positions(
    dir: &Path,
    pairs: &BTreeMap<PairId, Vec<Vec<Ray>>>,
    num_steps: usize,
) -> Result<BTreeMap<NodeId, Vec<Point3>>> {
    let node_dir = dir.join(NODE_DIR);
    let nodes: BTreeSet<NodeId> = pairs.keys().flat_map(|&(a, b)| [a, b]).collect();
    let mut out = BTreeMap::new();
    for node in nodes {
        let file = ["Tx", "Rx"]
            .iter()
            .map(|role| node_dir.join(format!("NodePositions{role}{node}.csv")))
            .find(|p| p.is_file());
        let positions = match file {
            Some(path) => {
                let mut v = Vec::with_capacity(num_steps);
                for (i, line) in read(&path)?.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let p = parse_points(&path, i + 1, line)?;
                    if p.len() != 1 {
                        return Err(Error::format(&path, Some(i + 1), "expected one x,y,z position"));
                    }
                    v.push(p[0]);
                }
                if v.len() != num_steps {
                    return Err(Error::format(
                        &path,
                        None,
                        format!("{} positions for {num_steps} time steps", v.len()),
                    ));
                }
                v
            }
            None => positions_from_rays(node, pairs, num_steps)
                .ok_or_else(|| Error::format(&node_dir, None, format!("no position known for node {node}")))?,
        };
        out.insert(node, positions);
    }
    Ok(out)
}

// First vertex of rays leaving the node or last vertex of rays reaching it.
// Steps without rays reuse the nearest earlier (else later) known position.
fn positions_from_rays(node: NodeId, pairs: &BTreeMap<PairId, Vec<Vec<Ray>>>, num_steps: usize) -> Option<Vec<Point3>> {
    let mut known: Vec<Option<Point3>> = vec![None; num_steps];
    for (&(tx, rx), steps) in pairs {
        for (t, rays) in steps.iter().enumerate() {
            let Some(ray) = rays.first() else { continue };
            if known[t].is_none() {
                if tx == node {
                    known[t] = ray.vertices.first().copied();
                } else if rx == node {
                    known[t] = ray.vertices.last().copied();
                }
            }
        }
    }
    let first = known.iter().flatten().next().copied()?;
    let mut current = first;
    Some(
        known
            .into_iter()
            .map(|p| {
                if let Some(p) = p {
                    current = p;
                }
                current
            })
            .collect(),
    )
}

fn join(values: impl Iterator<Item = String>) -> String {
    values.collect::<Vec<_>>().join(",")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Rays that were not written.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExportStats {
    pub rays_written: usize,
    pub rays_dropped: usize,
}

/// Write `trace` as a scenario folder, dropping rays below `floor_db`.
pub fn export_scenario(trace: &ChannelTrace, dir: &Path, floor_db: f64) -> Result<ExportStats> {
    for sub in [QD_DIR, MPC_DIR, NODE_DIR, "Input"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let mut stats = ExportStats::default();
    for (&(tx, rx), steps) in trace.pairs() {
        let mut qd = String::new();
        for (t, rays) in steps.iter().enumerate() {
            let mut kept: Vec<&Ray> = rays
                .iter()
                .filter(|r| r.path_gain.is_finite() && r.path_gain >= floor_db)
                .collect();
            stats.rays_dropped += rays.len() - kept.len();
            stats.rays_written += kept.len();
            kept.sort_by_key(|r| r.reflection_order());

            let _ = writeln!(qd, "{}", kept.len());
            if !kept.is_empty() {
                let mut aod = Vec::with_capacity(kept.len());
                let mut aoa = Vec::with_capacity(kept.len());
                for r in &kept {
                    // Rays in a ChannelTrace have validated vertices.
                    aod.push(angles_of_departure(r).map_err(|e| Error::format(dir, None, e))?);
                    aoa.push(angles_of_arrival(r).map_err(|e| Error::format(dir, None, e))?);
                }
                let deg = |x: f64| format!("{:.6}", x.to_degrees());
                let _ = writeln!(qd, "{}", join(kept.iter().map(|r| format!("{:.11e}", r.delay))));
                let _ = writeln!(qd, "{}", join(kept.iter().map(|r| format!("{:.6}", r.path_gain))));
                let _ = writeln!(qd, "{}", join(kept.iter().map(|r| format!("{:.6}", r.phase))));
                let _ = writeln!(qd, "{}", join(aod.iter().map(|a| deg(a.elevation))));
                let _ = writeln!(qd, "{}", join(aod.iter().map(|a| deg(a.azimuth))));
                let _ = writeln!(qd, "{}", join(aoa.iter().map(|a| deg(a.elevation))));
                let _ = writeln!(qd, "{}", join(aoa.iter().map(|a| deg(a.azimuth))));
            }

            let mut by_order: BTreeMap<usize, String> = BTreeMap::new();
            for r in &kept {
                let row = join(r.vertices.iter().flat_map(|v| [v.x, v.y, v.z]).map(|c| format!("{c:.6}")));
                let _ = writeln!(by_order.entry(r.reflection_order()).or_default(), "{row}");
            }
            for (k, rows) in by_order {
                write_file(&dir.join(MPC_DIR).join(format!("MpcTx{tx}Rx{rx}Refl{k}Trc{t}.csv")), &rows)?;
            }
        }
        write_file(&dir.join(QD_DIR).join(format!("Tx{tx}Rx{rx}.txt")), &qd)?;
    }

    let txs: BTreeSet<NodeId> = trace.pair_ids().map(|p| p.0).collect();
    let rxs: BTreeSet<NodeId> = trace.pair_ids().map(|p| p.1).collect();
    for (&node, positions) in trace.node_positions() {
        let mut rows = String::new();
        for p in positions {
            let _ = writeln!(rows, "{:.6},{:.6},{:.6}", p.x, p.y, p.z);
        }
        for (role, set) in [("Tx", &txs), ("Rx", &rxs)] {
            if set.contains(&node) {
                write_file(&dir.join(NODE_DIR).join(format!("NodePositions{role}{node}.csv")), &rows)?;
            }
        }
    }

    let n = trace.num_steps();
    let cfg = format!(
        "TotalTimeDuration\t{}\nNumberOfTimeDivisions\t{n}\n",
        round_significant(trace.timestep() * n as f64, 12)
    );
    write_file(&dir.join(PARA_CFG), &cfg)?;
    Ok(stats)
}
