//! The workspace: JSON objects stored under their content hash, plus an
//! append-only run log.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use pseudoarc_core::io::Object;

use crate::fail::Failure;

pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Workspace {
        Workspace { root: root.into() }
    }

    fn objects(&self) -> PathBuf {
        self.root.join("objects")
    }

    /// Writes `obj` under its hash (a no-op if it is already there) and
    /// returns the hash and the stored path.
    pub fn put(&self, obj: &Object) -> Result<(String, PathBuf), Failure> {
        let text = obj.to_json();
        // the store must only ever hold objects that read back unchanged
        match Object::from_json(&text) {
            Ok(back) if back == *obj => {}
            _ => return Err(Failure::Internal("object does not round-trip through JSON".into())),
        }
        let hash = obj.content_hash();
        let dir = self.objects();
        fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
        let path = dir.join(format!("{hash}.json"));
        if !path.exists() {
            fs::write(&path, text).map_err(|e| Failure::io(&path, e))?;
        }
        Ok((hash, path))
    }

    /// Looks an object up by full hash or by a unique prefix of at least six
    /// hex digits.
    pub fn find(&self, key: &str) -> Result<Option<PathBuf>, Failure> {
        if key.len() < 6 || !key.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Ok(None);
        }
        let Ok(entries) = fs::read_dir(self.objects()) else {
            return Ok(None);
        };
        let mut hits: Vec<PathBuf> = entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with(key) && n.ends_with(".json"))
            })
            .collect();
        match hits.len() {
            0 => Ok(None),
            1 => Ok(hits.pop()),
            n => Err(Failure::Usage(format!("hash prefix {key} matches {n} stored objects"))),
        }
    }

    /// Reads an object from a file path, or from the store when `arg` is not
    /// an existing file but names a stored hash.
    pub fn load(&self, arg: &str) -> Result<Object, Failure> {
        let direct = Path::new(arg);
        let path = if direct.is_file() {
            direct.to_path_buf()
        } else if let Some(p) = self.find(arg)? {
            p
        } else {
            return Err(Failure::Usage(format!("no file or stored object named {arg:?}")));
        };
        let text = fs::read_to_string(&path).map_err(|e| Failure::io(&path, e))?;
        read_object(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
    }

    /// Appends one JSON line describing a finished command.
    pub fn log(&self, args: &[String], exit: i32, outputs: &[String]) -> Result<(), Failure> {
        fs::create_dir_all(&self.root).map_err(|e| Failure::io(&self.root, e))?;
        let path = self.root.join("runs.jsonl");
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let line = serde_json::json!({ "time": secs, "args": args, "exit": exit, "outputs": outputs });
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Failure::io(&path, e))?;
        writeln!(f, "{line}").map_err(|e| Failure::io(&path, e))
    }
}

/// A tagged object, or a bare relation in the `{dom, cod, pairs}` format.
pub fn read_object(text: &str) -> Result<Object, String> {
    match Object::from_json(text) {
        Ok(o) => Ok(o),
        Err(tagged) => match serde_json::from_str(text) {
            Ok(doc) => Ok(Object::Relation(doc)),
            Err(_) => Err(tagged.to_string()),
        },
    }
}
