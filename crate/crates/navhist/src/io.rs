//! Trajectory, sampled-history and episode file ingestion/persistence.
//!
//! Trajectory files are UTF-8 JSON lines, one observation per line. An
//! optional header object `{"meta": {...}}` may appear as line 1 only.
//! Sampled histories are a single JSON object. Episode summaries are JSON
//! lines. All floats round-trip bit-exactly.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::types::{Episode, Observation, SampledHistory, Trajectory, HEIGHT_TOLERANCE_M};

#[derive(Deserialize)]
struct HeaderLine {
    meta: BTreeMap<String, String>,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn looks_like_header(line: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(line)
        .map(|v| v.get("meta").is_some())
        .unwrap_or(false)
}

/// Parse trajectory JSON lines from a reader. `line numbers are 1-based`.
fn read_trajectory(reader: impl BufRead) -> Result<Trajectory> {
    let mut meta = BTreeMap::new();
    let mut observations: Vec<Observation> = Vec::new();
    let mut z0: Option<f64> = None;
    let mut dim: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::MalformedLine { line: lineno, msg: e.to_string() })?;
        if line.trim().is_empty() {
            return Err(Error::MalformedLine { line: lineno, msg: "empty line".into() });
        }
        if lineno == 1 && looks_like_header(&line) {
            let header: HeaderLine = serde_json::from_str(&line)
                .map_err(|e| Error::MalformedLine { line: lineno, msg: e.to_string() })?;
            meta = header.meta;
            continue;
        }
        if looks_like_header(&line) {
            return Err(Error::HeaderNotFirst { line: lineno });
        }
        let obs: Observation = serde_json::from_str(&line)
            .map_err(|e| Error::MalformedLine { line: lineno, msg: e.to_string() })?;
        obs.validate()
            .map_err(|e| Error::MalformedLine { line: lineno, msg: e.to_string() })?;

        let expected_t = observations.len() as u64;
        if obs.t != expected_t {
            return Err(Error::NonContiguousTimestep { line: lineno, expected: expected_t, got: obs.t });
        }
        match z0 {
            None => z0 = Some(obs.position.z),
            Some(z) => {
                if (obs.position.z - z).abs() > HEIGHT_TOLERANCE_M {
                    return Err(Error::NonConstantHeight { line: lineno, expected: z, got: obs.position.z });
                }
            }
        }
        match dim {
            None => dim = Some(obs.features.feat_dim()),
            Some(d) => {
                if obs.features.feat_dim() != d {
                    return Err(Error::FeatureDimMismatch {
                        line: lineno,
                        expected: d,
                        got: obs.features.feat_dim(),
                    });
                }
            }
        }
        observations.push(obs);
    }

    // Per-line checks above already cover the cross-observation invariants.
    Trajectory::new(observations, meta)
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_trajectory(BufReader::new(file))
}

/// Inverse of [`load_trajectory`]; a header line is written iff meta is
/// non-empty, so `load(save(x)) == x` holds bit-exactly.
pub fn save_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut out = String::new();
    if !traj.meta().is_empty() {
        let header = serde_json::json!({ "meta": traj.meta() });
        out.push_str(&header.to_string());
        out.push('\n');
    }
    for obs in traj.observations() {
        out.push_str(&serde_json::to_string(obs).expect("observation serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn load_sampled(path: &Path) -> Result<SampledHistory> {
    let data = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&data).map_err(|e| Error::InvalidHistory(e.to_string()))
}

pub fn save_sampled(history: &SampledHistory, path: &Path) -> Result<()> {
    let json = serde_json::to_string(history).expect("history serializes");
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(json.as_bytes()).map_err(|e| io_err(path, e))?;
    file.write_all(b"\n").map_err(|e| io_err(path, e))
}

pub fn load_episodes(path: &Path) -> Result<Vec<Episode>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut episodes = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::MalformedLine { line: lineno, msg: e.to_string() })?;
        if line.trim().is_empty() {
            return Err(Error::MalformedLine { line: lineno, msg: "empty line".into() });
        }
        let ep: Episode = serde_json::from_str(&line)
            .map_err(|e| Error::MalformedLine { line: lineno, msg: e.to_string() })?;
        ep.validate()
            .map_err(|e| Error::MalformedLine { line: lineno, msg: e.to_string() })?;
        episodes.push(ep);
    }
    Ok(episodes)
}

pub fn save_episodes(episodes: &[Episode], path: &Path) -> Result<()> {
    let mut out = String::new();
    for ep in episodes {
        out.push_str(&serde_json::to_string(ep).expect("episode serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{FeatureTokens, Position};
    use std::io::Cursor;

    fn line(t: u64, x: f64, z: f64) -> String {
        format!(
            r#"{{"t": {t}, "p": [{x}, 0.0, {z}], "heading_deg": 0.0, "feature": [[1.0, 0.0]], "room_id": null, "action": null}}"#
        )
    }

    #[test]
    fn loads_three_line_file() {
        let text = [line(0, 0.0, 0.9), line(1, 0.1, 0.9), line(2, 0.2, 0.9)].join("\n");
        let traj = read_trajectory(Cursor::new(text)).unwrap();
        assert_eq!(traj.len(), 3);
        assert!(traj.meta().is_empty());
    }

    #[test]
    fn rejects_non_contiguous_timestep_with_line_number() {
        let text = [line(0, 0.0, 0.9), line(2, 0.1, 0.9)].join("\n");
        let err = read_trajectory(Cursor::new(text)).unwrap_err();
        match err {
            Error::NonContiguousTimestep { line, expected, got } => {
                assert_eq!(line, 2);
                assert_eq!(expected, 1);
                assert_eq!(got, 2);
            }
            other => panic!("unexpected error: {other}"),
        }
        assert!(err.to_string().contains("non-contiguous timestep at line 2"));
    }

    #[test]
    fn rejects_varying_height() {
        let text = [line(0, 0.0, 0.9), line(1, 0.1, 1.1)].join("\n");
        let err = read_trajectory(Cursor::new(text)).unwrap_err();
        assert!(err.to_string().contains("non-constant height"));
    }

    #[test]
    fn rejects_varying_feature_dim() {
        let bad = r#"{"t": 1, "p": [0.1, 0.0, 0.9], "heading_deg": 0.0, "feature": [[1.0, 0.0, 0.0]], "room_id": null, "action": null}"#;
        let text = format!("{}\n{}", line(0, 0.0, 0.9), bad);
        let err = read_trajectory(Cursor::new(text)).unwrap_err();
        match err {
            Error::FeatureDimMismatch { line, expected, got } => {
                assert_eq!((line, expected, got), (2, 2, 3));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = format!("{}\nnot json", line(0, 0.0, 0.9));
        let err = read_trajectory(Cursor::new(text)).unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 2, .. }));
    }

    #[test]
    fn header_parsed_on_line_one_only() {
        let header = r#"{"meta": {"instruction": "find a mug"}}"#;
        let text = format!("{}\n{}", header, line(0, 0.0, 0.9));
        let traj = read_trajectory(Cursor::new(text)).unwrap();
        assert_eq!(traj.meta().get("instruction").unwrap(), "find a mug");

        let text = format!("{}\n{}", line(0, 0.0, 0.9), header);
        let err = read_trajectory(Cursor::new(text)).unwrap_err();
        assert!(matches!(err, Error::HeaderNotFirst { line: 2 }));
    }

    #[test]
    fn empty_file_is_empty_trajectory() {
        let traj = read_trajectory(Cursor::new("")).unwrap();
        assert!(traj.is_empty());
    }

    #[test]
    fn trajectory_round_trip_with_meta() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.jsonl");
        let obs = Observation::new(
            0,
            Position::new(0.123456789012345, -3.25, 0.9),
            359.5,
            FeatureTokens::new(vec![vec![0.1, -0.2], vec![1.0e-17, 4.0]]).unwrap(),
            Some("room_0".into()),
            Some("move_e".into()),
        )
        .unwrap();
        let traj = Trajectory::new(vec![obs], BTreeMap::new())
            .unwrap()
            .with_meta_entry("instruction", "go to a laptop in the bedroom");
        save_trajectory(&traj, &path).unwrap();
        let back = load_trajectory(&path).unwrap();
        assert_eq!(traj, back);
    }

    #[test]
    fn sampled_history_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hist.json");
        let h = SampledHistory::dummy(4);
        save_sampled(&h, &path).unwrap();
        assert_eq!(load_sampled(&path).unwrap(), h);
    }

    #[test]
    fn episode_lines_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.jsonl");
        let eps = vec![
            Episode::new(true, 10, 10, ["room_0".to_string()].into(), 4).unwrap(),
            Episode::new(false, 5, 12, ["room_0".to_string(), "room_1".to_string()].into(), 4).unwrap(),
        ];
        save_episodes(&eps, &path).unwrap();
        assert_eq!(load_episodes(&path).unwrap(), eps);
    }
}
