//! Text formats: time-series and event CSV, snapshots, timeline
//! directories and monitor reports.
//!
//! Every float goes through [`fmt_f64`], which prints 17 significant digits
//! and therefore reads back to the identical `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::homogeneous::{Family, HomogeneousState};
use crate::monitors::MonitorReport;
use crate::surgery::{NeckDescriptor, Side};
use crate::timeline::{MetricSnapshot, Payload, Phase, PostComponent, SurgeryEvent, Timeline, WarpedScheme};
use crate::warped::{GridPolicy, Topology, WarpedProfile};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Io(msg.into())
}

fn num(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| bad(format!("bad number `{s}`")))
}

fn int(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| bad(format!("bad integer `{s}`")))
}

// --------------------------------------------------------------- series

pub const SERIES_HEADER: &str = "t,r_min,r_max,volume,rhat,width_bound,n_components,event_flag";

/// One row of `timeseries.csv`: global diagnostics after a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub volume: f64,
    pub rhat: f64,
    pub width_bound: f64,
    pub n_components: usize,
    /// 0 for a flow step, 1 for the state right after a surgery.
    pub event_flag: u8,
}

pub fn write_series(rows: &[SeriesRow]) -> String {
    let mut s = String::from(SERIES_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.r_min),
            fmt_f64(r.r_max),
            fmt_f64(r.volume),
            fmt_f64(r.rhat),
            fmt_f64(r.width_bound),
            r.n_components,
            r.event_flag
        );
    }
    s
}

pub fn read_series(text: &str) -> Result<Vec<SeriesRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(SERIES_HEADER) {
        return Err(bad("timeseries header mismatch"));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 8 {
                return Err(bad(format!("timeseries row has {} fields", f.len())));
            }
            Ok(SeriesRow {
                t: num(f[0])?,
                r_min: num(f[1])?,
                r_max: num(f[2])?,
                volume: num(f[3])?,
                rhat: num(f[4])?,
                width_bound: num(f[5])?,
                n_components: int(f[6])?,
                event_flag: f[7].trim().parse().map_err(|_| bad("bad event flag"))?,
            })
        })
        .collect()
}

// --------------------------------------------------------------- events

pub const EVENTS_HEADER: &str =
    "t,node,necks,components_after,r_min_pre,r_min_post,r_max_pre,r_max_post,theta,volume_pre,volume_post,width_pre,width_post";

fn path_tag(path: &[usize]) -> String {
    if path.is_empty() {
        "root".into()
    } else {
        path.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// One row per surgery, depth first through the timeline tree. The
/// timeline lives in a frame scaled by the metric factor `scale`; rows are
/// converted back to the units of the initial metric.
pub fn write_events(timeline: &Timeline, scale: f64) -> String {
    let (t_, r_, v_) = (
        |x: f64| fmt_f64(x / scale),
        |x: f64| fmt_f64(x * scale),
        |x: f64| fmt_f64(x / scale.powf(1.5)),
    );
    let mut s = String::from(EVENTS_HEADER);
    s.push('\n');
    timeline.walk(&mut |t, path| {
        for ev in &t.surgeries {
            let d = &ev.pre.diagnostics;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                t_(ev.time),
                path_tag(path),
                ev.necks_used.len(),
                ev.components_after(),
                r_(d.r_min),
                r_(ev.post_r_min()),
                r_(d.r_max),
                r_(ev.post_r_max()),
                r_(ev.theta),
                v_(d.volume),
                v_(ev.post_volume()),
                t_(d.width_bound),
                t_(ev.post_width()),
            );
        }
    });
    s
}

// ------------------------------------------------------------ snapshots

/// Plain-text snapshot: `# key = value` header lines, then `x phi psi`
/// rows for warped metrics. Homogeneous metrics carry everything in the
/// header.
pub fn write_snapshot(scenario: &str, snap: &MetricSnapshot) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "# {k} = {v}");
    };
    kv("scenario", scenario.to_string());
    match &snap.payload {
        Payload::Warped(p) => {
            kv("N", p.n().to_string());
            kv("time", fmt_f64(snap.time));
            kv("topology_tag", p.topology.tag().to_string());
        }
        Payload::Homogeneous(h) => {
            kv("N", "0".into());
            kv("time", fmt_f64(snap.time));
            kv("topology_tag", "homogeneous".into());
            match h.family {
                Family::ConstantCurvature { k0 } => {
                    kv("family", "constK".into());
                    kv("k0", fmt_f64(k0));
                }
                Family::CircleTimesHypSurface { a, b } => {
                    kv("family", "product".into());
                    kv("a", fmt_f64(a));
                    kv("b", fmt_f64(b));
                }
            }
            kv("scale", fmt_f64(h.scale));
            kv("ref_volume", fmt_f64(h.ref_volume));
        }
    }
    kv("phase", snap.phase.tag().to_string());
    s.push_str("x phi psi\n");
    if let Payload::Warped(p) = &snap.payload {
        for i in 0..=p.n() {
            let _ = writeln!(s, "{} {} {}", fmt_f64(p.x(i)), fmt_f64(p.phi[i]), fmt_f64(p.psi[i]));
        }
    }
    s
}

/// Parse a snapshot; returns the scenario name and the snapshot with
/// freshly computed diagnostics.
pub fn read_snapshot(text: &str) -> Result<(String, MetricSnapshot)> {
    let mut header = std::collections::BTreeMap::new();
    let mut rows = Vec::new();
    let mut in_body = false;
    for line in text.lines() {
        if let Some(h) = line.strip_prefix('#') {
            let (k, v) = h
                .split_once('=')
                .ok_or_else(|| bad(format!("bad header line `{line}`")))?;
            header.insert(k.trim().to_string(), v.trim().to_string());
        } else if line.trim() == "x phi psi" {
            in_body = true;
        } else if in_body && !line.trim().is_empty() {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(format!("snapshot row has {} fields", f.len())));
            }
            rows.push((num(f[1])?, num(f[2])?));
        }
    }
    let get = |k: &str| {
        header
            .get(k)
            .map(String::as_str)
            .ok_or_else(|| bad(format!("snapshot header lacks `{k}`")))
    };
    let time = num(get("time")?)?;
    let phase = Phase::from_tag(get("phase").unwrap_or("regular")).ok_or_else(|| bad("bad phase tag"))?;
    let tag = get("topology_tag")?;
    let payload = if tag == "homogeneous" {
        let family = match get("family")? {
            "constK" => Family::ConstantCurvature { k0: num(get("k0")?)? },
            "product" => Family::CircleTimesHypSurface {
                a: num(get("a")?)?,
                b: num(get("b")?)?,
            },
            f => return Err(bad(format!("unknown family `{f}`"))),
        };
        Payload::Homogeneous(HomogeneousState::new(
            family,
            num(get("scale")?)?,
            num(get("ref_volume")?)?,
        )?)
    } else {
        let topology = Topology::from_tag(tag).ok_or_else(|| bad(format!("unknown topology `{tag}`")))?;
        let n = int(get("N")?)?;
        if rows.len() != n + 1 {
            return Err(bad(format!("snapshot declares N = {n} but has {} rows", rows.len())));
        }
        let (phi, psi) = rows.into_iter().unzip();
        Payload::Warped(WarpedProfile::new(phi, psi, topology)?)
    };
    Ok((get("scenario")?.to_string(), MetricSnapshot::new(time, payload, phase)?))
}

// ------------------------------------------------------------ timelines

fn write_neck(n: &NeckDescriptor) -> String {
    let side = match n.red_side {
        None => "none",
        Some(Side::Left) => "left",
        Some(Side::Right) => "right",
    };
    format!(
        "{} {} {} {} {} {}",
        n.center_index,
        fmt_f64(n.center_s),
        fmt_f64(n.lambda),
        fmt_f64(n.half_length_s),
        fmt_f64(n.quality),
        side
    )
}

fn read_neck(line: &str) -> Result<NeckDescriptor> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != 6 {
        return Err(bad(format!("bad neck line `{line}`")));
    }
    let red_side = match f[5] {
        "none" => None,
        "left" => Some(Side::Left),
        "right" => Some(Side::Right),
        s => return Err(bad(format!("bad side `{s}`"))),
    };
    Ok(NeckDescriptor {
        center_index: int(f[0])?,
        center_s: num(f[1])?,
        lambda: num(f[2])?,
        half_length_s: num(f[3])?,
        quality: num(f[4])?,
        red_side,
    })
}

/// Write a timeline tree under `dir`: one directory per node holding its
/// snapshots, step record and surgery (if any), with children in
/// `child_<k>`.
pub fn write_timeline(dir: &Path, scenario: &str, t: &Timeline) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut scheme = String::new();
    match t.scheme {
        None => scheme.push_str("none\n"),
        Some(s) => {
            let _ = writeln!(
                scheme,
                "points_per_radius = {}\nmax_spacing = {}\nn_min = {}\ntrigger = {}\nc_cfl = {}",
                fmt_f64(s.policy.points_per_radius),
                fmt_f64(s.policy.max_spacing),
                s.policy.n_min,
                fmt_f64(s.policy.trigger),
                fmt_f64(s.c_cfl)
            );
        }
    }
    fs::write(dir.join("scheme.txt"), scheme)?;
    let mut steps = String::from("marks");
    for m in &t.marks {
        let _ = write!(steps, " {m}");
    }
    steps.push('\n');
    for dt in &t.dts {
        let _ = writeln!(steps, "{}", fmt_f64(*dt));
    }
    fs::write(dir.join("steps.txt"), steps)?;
    for (k, s) in t.states.iter().enumerate() {
        fs::write(dir.join(format!("state_{k:05}.snap")), write_snapshot(scenario, s))?;
    }
    if let Some(ev) = t.surgeries.first() {
        let mut s = String::new();
        let _ = writeln!(s, "time = {}\ntheta = {}", fmt_f64(ev.time), fmt_f64(ev.theta));
        let starts: Vec<String> = ev.post.iter().map(|c| c.pre_start.to_string()).collect();
        let _ = writeln!(s, "pre_start = {}", starts.join(" "));
        for n in &ev.necks_used {
            let _ = writeln!(s, "neck = {}", write_neck(n));
        }
        fs::write(dir.join("surgery.txt"), s)?;
    }
    for (k, c) in t.children.iter().enumerate() {
        write_timeline(&dir.join(format!("child_{k}")), scenario, c)?;
    }
    Ok(())
}

fn kv_lines(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

/// Inverse of [`write_timeline`]. Diagnostics are recomputed from the
/// stored metrics; surgery events are rebuilt without re-running their
/// checks so that a damaged record still loads and fails the audit.
pub fn read_timeline(dir: &Path) -> Result<Timeline> {
    let read =
        |name: &str| fs::read_to_string(dir.join(name)).map_err(|e| bad(format!("{}: {e}", dir.join(name).display())));
    let scheme_text = read("scheme.txt")?;
    let scheme = if scheme_text.trim() == "none" {
        None
    } else {
        let kv = kv_lines(&scheme_text);
        let get = |k: &str| {
            kv.iter()
                .find(|(a, _)| a == k)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| bad(format!("scheme lacks `{k}`")))
        };
        Some(WarpedScheme {
            policy: GridPolicy {
                points_per_radius: num(&get("points_per_radius")?)?,
                max_spacing: num(&get("max_spacing")?)?,
                n_min: int(&get("n_min")?)?,
                trigger: num(&get("trigger")?)?,
            },
            c_cfl: num(&get("c_cfl")?)?,
        })
    };
    let steps = read("steps.txt")?;
    let mut lines = steps.lines();
    let marks = lines
        .next()
        .and_then(|l| l.strip_prefix("marks"))
        .ok_or_else(|| bad("steps.txt lacks marks"))?
        .split_whitespace()
        .map(int)
        .collect::<Result<Vec<_>>>()?;
    let dts = lines
        .filter(|l| !l.trim().is_empty())
        .map(num)
        .collect::<Result<Vec<_>>>()?;
    let mut names: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("state_") && n.ends_with(".snap"))
        .collect();
    names.sort();
    let mut states = Vec::new();
    for n in &names {
        states.push(read_snapshot(&read(n)?)?.1);
    }
    let mut children = Vec::new();
    while dir.join(format!("child_{}", children.len())).is_dir() {
        children.push(read_timeline(&dir.join(format!("child_{}", children.len())))?);
    }
    let mut t = Timeline {
        states,
        dts,
        marks,
        scheme,
        children,
        ..Timeline::default()
    };
    if dir.join("surgery.txt").is_file() {
        let kv = kv_lines(&read("surgery.txt")?);
        let get = |k: &str| {
            kv.iter()
                .find(|(a, _)| a == k)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| bad(format!("surgery lacks `{k}`")))
        };
        let time = num(&get("time")?)?;
        let starts = get("pre_start")?
            .split_whitespace()
            .map(int)
            .collect::<Result<Vec<_>>>()?;
        if starts.len() != t.children.len() {
            return Err(bad("surgery record does not match the child count"));
        }
        let pre = t
            .states
            .last()
            .cloned()
            .ok_or_else(|| bad("surgery without a pre snapshot"))?;
        let post = t
            .children
            .iter()
            .zip(&starts)
            .map(|(c, &s)| {
                let snapshot = c.states.first().cloned().ok_or_else(|| bad("empty child timeline"))?;
                Ok(PostComponent { snapshot, pre_start: s })
            })
            .collect::<Result<Vec<_>>>()?;
        let necks_used = kv
            .iter()
            .filter(|(k, _)| k == "neck")
            .map(|(_, v)| read_neck(v))
            .collect::<Result<Vec<_>>>()?;
        t.singular_times.push(time);
        t.surgeries.push(SurgeryEvent {
            time,
            pre,
            post,
            necks_used,
            theta: num(&get("theta")?)?,
        });
    }
    Ok(t)
}

// -------------------------------------------------------------- reports

pub fn write_report(report: &MonitorReport) -> String {
    let mut s = String::from("# check status worst_violation t x\n");
    for c in &report.checks {
        let status = match (c.pass, c.enforced) {
            (true, _) => "pass",
            (false, true) => "FAIL",
            (false, false) => "logged",
        };
        let _ = writeln!(
            s,
            "{} {} {} {} {}",
            c.name,
            status,
            fmt_f64(c.worst_violation),
            fmt_f64(c.location.0),
            fmt_f64(c.location.1)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::{make_profile, ProfileKind};

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(num(&fmt_f64(x)).unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn snapshot_round_trip() {
        let p = make_profile(ProfileKind::Round(1.0), 64).unwrap();
        let s = MetricSnapshot::new(0.125, Payload::Warped(p), Phase::Regular).unwrap();
        let text = write_snapshot("round", &s);
        assert!(text.starts_with("# scenario = round\n# N = 64\n"));
        let (name, back) = read_snapshot(&text).unwrap();
        assert_eq!(name, "round");
        assert_eq!(back, s);
    }

    #[test]
    fn homogeneous_snapshot_round_trip() {
        let h = HomogeneousState::new(Family::CircleTimesHypSurface { a: 3.0, b: 1.0 }, 1.0, 2.0).unwrap();
        let s = MetricSnapshot::new(1.0, Payload::Homogeneous(h), Phase::Regular).unwrap();
        let (_, back) = read_snapshot(&write_snapshot("homogeneous-product", &s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn series_round_trip() {
        let rows = vec![SeriesRow {
            t: 0.1,
            r_min: 6.0,
            r_max: 6.5,
            volume: 19.7,
            rhat: 40.0,
            width_bound: 12.0,
            n_components: 1,
            event_flag: 0,
        }];
        assert_eq!(read_series(&write_series(&rows)).unwrap(), rows);
    }
}
