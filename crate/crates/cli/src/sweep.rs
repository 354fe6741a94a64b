//! Resumable grid sweeps.
//!
//! Each grid point is computed independently and saved as
//! `<out>.parts/NNNNNN.part`, written to a temporary name and renamed into
//! place, so a part either exists completely or not at all. A rerun after an
//! interruption only computes the missing points. Once every point is done
//! the parts are joined in grid order into `<out>` and the directory is
//! removed.

use crate::CliError;
use rayon::prelude::*;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Rows for one grid point, plus a note when the point failed numerically.
pub struct Point {
    pub rows: Vec<String>,
    pub failure: Option<String>,
}

pub trait Sweep: Sync {
    fn columns(&self) -> &'static [&'static str];
    fn points(&self) -> usize;
    fn compute(&self, index: usize) -> Point;
}

/// What happened, for the exit code.
pub struct Outcome {
    pub failures: Vec<String>,
}

const HEADER_FILE: &str = "header";

fn parts_dir(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".parts");
    out.with_file_name(name)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)
}

fn part_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("{index:06}.part"))
}

/// Part file layout: a status line (`ok` or `failed <note>`), then rows.
fn encode(p: &Point) -> String {
    let mut s = match &p.failure {
        None => "ok\n".to_string(),
        Some(note) => format!("failed {}\n", note.replace('\n', " ")),
    };
    for r in &p.rows {
        s.push_str(r);
        s.push('\n');
    }
    s
}

fn decode(text: &str) -> Result<Point, String> {
    let (status, rows) = text.split_once('\n').ok_or("empty part file")?;
    let failure = match status {
        "ok" => None,
        s => Some(s.strip_prefix("failed ").ok_or("bad status line")?.to_string()),
    };
    Ok(Point {
        rows: rows.lines().map(str::to_string).collect(),
        failure,
    })
}

pub fn run(sweep: &dyn Sweep, header: &str, out: &Path, threads: usize) -> Result<Outcome, CliError> {
    let dir = parts_dir(out);
    let io = |what: &str, p: &Path, e: std::io::Error| CliError::Io(format!("{what} {}: {e}", p.display()));
    fs::create_dir_all(&dir).map_err(|e| io("cannot create", &dir, e))?;
    let header_path = dir.join(HEADER_FILE);
    match fs::read_to_string(&header_path) {
        Ok(existing) if existing != header => {
            return Err(CliError::Usage(format!(
                "{} holds an unfinished sweep with a different configuration; remove it or use another --out",
                dir.display()
            )))
        }
        Ok(_) => {}
        Err(_) => write_atomic(&header_path, header.as_bytes()).map_err(|e| io("cannot write", &header_path, e))?,
    }

    let pending: Vec<usize> = (0..sweep.points()).filter(|&i| !part_path(&dir, i).exists()).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    pool.install(|| {
        pending.par_iter().try_for_each(|&i| {
            let path = part_path(&dir, i);
            write_atomic(&path, encode(&sweep.compute(i)).as_bytes()).map_err(|e| io("cannot write", &path, e))
        })
    })?;

    let mut text = String::from(header);
    text.push_str(&sweep.columns().join(","));
    text.push('\n');
    let mut failures = Vec::new();
    for i in 0..sweep.points() {
        let path = part_path(&dir, i);
        let raw = fs::read_to_string(&path).map_err(|e| io("cannot read", &path, e))?;
        let point = decode(&raw).map_err(|e| CliError::Io(format!("corrupt {}: {e}", path.display())))?;
        for r in &point.rows {
            text.push_str(r);
            text.push('\n');
        }
        failures.extend(point.failure);
    }
    write_atomic(out, text.as_bytes()).map_err(|e| io("cannot write", out, e))?;
    fs::remove_dir_all(&dir).map_err(|e| io("cannot remove", &dir, e))?;
    Ok(Outcome { failures })
}

/// Turns TOML text into `#`-prefixed header lines after a version line.
pub fn header(command: &str, echo: &str) -> String {
    let mut h = format!("# scad-amp {} {command}\n", env!("CARGO_PKG_VERSION"));
    for line in echo.lines() {
        h.push_str("# ");
        h.push_str(line);
        h.push('\n');
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Squares {
        calls: AtomicUsize,
        fail_at: Option<usize>,
    }

    impl Sweep for Squares {
        fn columns(&self) -> &'static [&'static str] {
            &["i", "square"]
        }
        fn points(&self) -> usize {
            5
        }
        fn compute(&self, i: usize) -> Point {
            self.calls.fetch_add(1, Ordering::SeqCst);
            Point {
                rows: vec![format!("{i},{}", i * i)],
                failure: (Some(i) == self.fail_at).then(|| format!("point {i}")),
            }
        }
    }

    #[test]
    fn resumes_missing_points_only() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("t.csv");
        let dir = parts_dir(&out);
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join(HEADER_FILE), "# h\n").unwrap();
        fs::write(part_path(&dir, 1), "ok\n1,1\n").unwrap();
        fs::write(part_path(&dir, 3), "ok\n3,9\n").unwrap();
        let s = Squares {
            calls: AtomicUsize::new(0),
            fail_at: None,
        };
        let o = run(&s, "# h\n", &out, 2).unwrap();
        assert_eq!(s.calls.load(Ordering::SeqCst), 3);
        assert!(o.failures.is_empty());
        assert_eq!(
            fs::read_to_string(&out).unwrap(),
            "# h\ni,square\n0,0\n1,1\n2,4\n3,9\n4,16\n"
        );
        assert!(!dir.exists());
    }

    #[test]
    fn refuses_parts_from_another_config() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("t.csv");
        let dir = parts_dir(&out);
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join(HEADER_FILE), "# other\n").unwrap();
        let s = Squares {
            calls: AtomicUsize::new(0),
            fail_at: None,
        };
        assert!(matches!(run(&s, "# h\n", &out, 1), Err(CliError::Usage(_))));
    }

    #[test]
    fn failures_survive_the_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("t.csv");
        let s = Squares {
            calls: AtomicUsize::new(0),
            fail_at: Some(2),
        };
        let o = run(&s, "# h\n", &out, 1).unwrap();
        assert_eq!(o.failures, vec!["point 2".to_string()]);
        let p = decode(&encode(&Point {
            rows: vec!["a".into()],
            failure: Some("x y".into()),
        }))
        .unwrap();
        assert_eq!(p.failure.as_deref(), Some("x y"));
        assert_eq!(p.rows, vec!["a".to_string()]);
    }
}
