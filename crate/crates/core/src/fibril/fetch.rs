//! Download of template structures from the public archive into a local cache.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::structure::parse_pdb;

/// Base URL of the public structure archive; files live at `{base}/{ID}.pdb`.
pub const DEFAULT_ARCHIVE_URL: &str = "https://files.rcsb.org/download";

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "ZIPPER_CACHE_DIR";

static CACHE_LOCK: Mutex<()> = Mutex::new(());

/// `$ZIPPER_CACHE_DIR`, else `$XDG_CACHE_HOME/zipper`, else `$HOME/.cache/zipper`,
/// else a directory under the system temp dir.
pub fn default_cache_dir() -> PathBuf {
    let env = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
    if let Some(p) = env(CACHE_DIR_ENV) {
        return p;
    }
    if let Some(p) = env("XDG_CACHE_HOME") {
        return p.join("zipper");
    }
    if let Some(p) = env("HOME") {
        return p.join(".cache").join("zipper");
    }
    std::env::temp_dir().join("zipper-cache")
}

fn normalize_id(id: &str) -> Result<String> {
    let id = id.trim();
    if id.len() != 4 || !id.chars().all(|c| c.is_ascii_alphanumeric()) {
        return Err(Error::Argument(format!("structure id must be 4 letters or digits, got {id:?}")));
    }
    Ok(id.to_ascii_uppercase())
}

/// Path of the cached file for `id`, whether or not it exists yet.
pub fn cached_path(id: &str, cache_dir: &Path) -> Result<PathBuf> {
    Ok(cache_dir.join(format!("{}.pdb", normalize_id(id)?)))
}

/// Fetches `id` from the default archive unless it is already cached.
pub fn fetch_template(id: &str, cache_dir: &Path) -> Result<PathBuf> {
    fetch_template_from(DEFAULT_ARCHIVE_URL, id, cache_dir)
}

/// Fetches `{base_url}/{ID}.pdb` into `cache_dir` and returns the cached path.
///
/// A cached file short-circuits the network. Downloads are checked to parse
/// as a structure with at least one atom before being moved into place, and
/// writes to the cache are serialized within the process.
pub fn fetch_template_from(base_url: &str, id: &str, cache_dir: &Path) -> Result<PathBuf> {
    let path = cached_path(id, cache_dir)?;
    let _guard = CACHE_LOCK.lock().unwrap_or_else(|p| p.into_inner());
    if path.is_file() {
        log::debug!("cache hit for {}", path.display());
        return Ok(path);
    }
    let id = normalize_id(id)?;
    let url = format!("{}/{id}.pdb", base_url.trim_end_matches('/'));
    log::info!("downloading {url}");
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(60)))
        .http_status_as_error(false)
        .build()
        .into();
    let mut response = agent
        .get(&url)
        .call()
        .map_err(|e| Error::Network(format!("cannot download {url}: {e}")))?;
    let status = response.status().as_u16();
    if status != 200 {
        return Err(Error::NotFound { status, url });
    }
    let body = response
        .body_mut()
        .read_to_string()
        .map_err(|e| Error::Network(format!("reading {url} failed: {e}")))?;
    match parse_pdb(&body) {
        Ok(s) if s.atom_count() > 0 => {}
        Ok(_) => return Err(Error::CorruptDownload(format!("{url} contains no atoms ({} bytes)", body.len()))),
        Err(e) => return Err(Error::CorruptDownload(format!("{url} does not parse: {e}"))),
    }
    fs::create_dir_all(cache_dir)?;
    let tmp = cache_dir.join(format!(".{id}.pdb.{}.part", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    const PDB: &str = "ATOM      1  CA  GLY A 127      -1.000   2.000   3.000  1.00  0.00           C\nEND\n";

    /// Serves `requests` HTTP/1.1 requests, answering `/{ok_id}.pdb` with
    /// `body` and everything else with 404. Returns the base URL and a hit counter.
    fn serve(ok_id: &'static str, body: &'static str, requests: usize) -> (String, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        std::thread::spawn(move || {
            for stream in listener.incoming().take(requests) {
                let mut stream = stream.unwrap();
                counter.fetch_add(1, Ordering::SeqCst);
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                }
                let (status, payload) = if request_line.contains(&format!("/{ok_id}.pdb ")) {
                    ("200 OK", body)
                } else {
                    ("404 Not Found", "not found")
                };
                write!(
                    stream,
                    "HTTP/1.1 {status}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                    payload.len()
                )
                .unwrap();
            }
        });
        (format!("http://{addr}/download"), hits)
    }

    #[test]
    fn download_then_cache_hit() {
        let dir = tempfile::tempdir().unwrap();
        let (base, hits) = serve("1ABC", PDB, 1);
        let p = fetch_template_from(&base, "1abc", dir.path()).unwrap();
        assert_eq!(p, dir.path().join("1ABC.pdb"));
        assert_eq!(fs::read_to_string(&p).unwrap(), PDB);
        // The stub has shut down; a second call must not touch the network.
        let again = fetch_template_from(&base, "1ABC", dir.path()).unwrap();
        assert_eq!(again, p);
        assert_eq!(hits.load(Ordering::SeqCst), 1);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn missing_id_reports_status() {
        let dir = tempfile::tempdir().unwrap();
        let (base, _) = serve("1ABC", PDB, 1);
        match fetch_template_from(&base, "ZZZZ", dir.path()) {
            Err(Error::NotFound { status, url }) => {
                assert_eq!(status, 404);
                assert!(url.ends_with("/ZZZZ.pdb"));
            }
            other => panic!("expected NotFound, got {other:?}"),
        }
        assert!(!dir.path().join("ZZZZ.pdb").exists());
    }

    #[test]
    fn corrupt_download_is_not_cached() {
        let dir = tempfile::tempdir().unwrap();
        let (base, _) = serve("2XYZ", "<html>oops</html>", 1);
        assert!(matches!(fetch_template_from(&base, "2XYZ", dir.path()), Err(Error::CorruptDownload(_))));
        assert!(!dir.path().join("2XYZ.pdb").exists());
    }

    #[test]
    fn unreachable_host_is_a_network_error() {
        let dir = tempfile::tempdir().unwrap();
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let err = fetch_template_from(&format!("http://{addr}"), "3NHD", dir.path()).unwrap_err();
        assert!(matches!(err, Error::Network(_)), "{err:?}");
        assert!(err.to_string().contains("--template"));
    }

    #[test]
    fn bad_ids() {
        let dir = tempfile::tempdir().unwrap();
        for id in ["", "ABC", "ABCDE", "AB-D"] {
            assert!(matches!(fetch_template_from("http://127.0.0.1:9", id, dir.path()), Err(Error::Argument(_))));
        }
    }
}
