//! File-backed state: `<root>/lexicons/<name>.json` and `<root>/subcorpora/<name>.json`.
//!
//! Updates are read-modify-write under a store-wide lock and land through a rename, so
//! readers see either the old or the new file. Callers that pass an expected version get
//! [`Error::VersionConflict`] instead of overwriting a newer state.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::curation::SubCorpus;
use crate::error::{Error, Result};
use crate::lexicon::{validate_name, Lexicon};

const LEXICON_DIR: &str = "lexicons";
const SUBCORPUS_DIR: &str = "subcorpora";

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    write_lock: Mutex<()>,
}

trait Stored: Sized {
    const KIND: &'static str;
    const DIR: &'static str;
    fn name(&self) -> &str;
    fn version(&self) -> u64;
    fn to_json(&self) -> String;
    fn from_json(text: &str, source: &str) -> Result<Self>;
}

impl Stored for Lexicon {
    const KIND: &'static str = "lexicon";
    const DIR: &'static str = LEXICON_DIR;
    fn name(&self) -> &str {
        Lexicon::name(self)
    }
    fn version(&self) -> u64 {
        Lexicon::version(self)
    }
    fn to_json(&self) -> String {
        Lexicon::to_json(self)
    }
    fn from_json(text: &str, source: &str) -> Result<Self> {
        Lexicon::from_json(text, source)
    }
}

impl Stored for SubCorpus {
    const KIND: &'static str = "sub-corpus";
    const DIR: &'static str = SUBCORPUS_DIR;
    fn name(&self) -> &str {
        SubCorpus::name(self)
    }
    fn version(&self) -> u64 {
        SubCorpus::version(self)
    }
    fn to_json(&self) -> String {
        SubCorpus::to_json(self)
    }
    fn from_json(text: &str, source: &str) -> Result<Self> {
        SubCorpus::from_json(text, source)
    }
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        for dir in [LEXICON_DIR, SUBCORPUS_DIR] {
            let p = root.join(dir);
            fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        Ok(Store {
            root,
            write_lock: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path_of<T: Stored>(&self, name: &str) -> Result<PathBuf> {
        validate_name(T::KIND, name)?;
        Ok(self.root.join(T::DIR).join(format!("{name}.json")))
    }

    fn read<T: Stored>(&self, name: &str) -> Result<T> {
        let path = self.path_of::<T>(name)?;
        match fs::read_to_string(&path) {
            Ok(text) => T::from_json(&text, &path.display().to_string()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::NotFound {
                kind: T::KIND,
                name: name.to_owned(),
            }),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    fn write<T: Stored>(&self, item: &T) -> Result<()> {
        let path = self.path_of::<T>(item.name())?;
        let tmp = path.with_extension("json.tmp");
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(item.to_json().as_bytes())
            .and_then(|_| f.write_all(b"\n"))
            .and_then(|_| f.sync_all())
            .map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }

    fn list<T: Stored>(&self) -> Result<Vec<T>> {
        let dir = self.root.join(T::DIR);
        let mut names: Vec<String> = fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|entry| {
                let name = entry.ok()?.file_name().into_string().ok()?;
                name.strip_suffix(".json").map(str::to_owned)
            })
            .collect();
        names.sort();
        names.iter().map(|n| self.read(n)).collect()
    }

    fn create<T: Stored>(&self, item: T) -> Result<T> {
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        if self.path_of::<T>(item.name())?.exists() {
            return Err(Error::Conflict {
                kind: T::KIND,
                name: item.name().to_owned(),
            });
        }
        self.write(&item)?;
        Ok(item)
    }

    fn update<T: Stored, R>(
        &self,
        name: &str,
        expected_version: Option<u64>,
        f: impl FnOnce(&mut T) -> Result<R>,
    ) -> Result<(T, R)> {
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        let mut item: T = self.read(name)?;
        if let Some(expected) = expected_version {
            if expected != item.version() {
                return Err(Error::VersionConflict {
                    kind: T::KIND,
                    name: name.to_owned(),
                    expected,
                    current: item.version(),
                });
            }
        }
        let out = f(&mut item)?;
        self.write(&item)?;
        Ok((item, out))
    }

    pub fn create_lexicon(&self, lexicon: Lexicon) -> Result<Lexicon> {
        self.create(lexicon)
    }

    pub fn lexicon(&self, name: &str) -> Result<Lexicon> {
        self.read(name)
    }

    pub fn lexicons(&self) -> Result<Vec<Lexicon>> {
        self.list()
    }

    /// Applies `f` to the stored lexicon and persists the result. Nothing is written if
    /// the version check or `f` fails.
    pub fn update_lexicon<R>(
        &self,
        name: &str,
        expected_version: Option<u64>,
        f: impl FnOnce(&mut Lexicon) -> Result<R>,
    ) -> Result<(Lexicon, R)> {
        self.update(name, expected_version, f)
    }

    pub fn create_subcorpus(&self, subcorpus: SubCorpus) -> Result<SubCorpus> {
        self.create(subcorpus)
    }

    pub fn subcorpus(&self, name: &str) -> Result<SubCorpus> {
        self.read(name)
    }

    pub fn subcorpora(&self) -> Result<Vec<SubCorpus>> {
        self.list()
    }

    pub fn update_subcorpus<R>(
        &self,
        name: &str,
        expected_version: Option<u64>,
        f: impl FnOnce(&mut SubCorpus) -> Result<R>,
    ) -> Result<(SubCorpus, R)> {
        self.update(name, expected_version, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curation::RankedResult;
    use crate::index::MetadataFilter;

    #[test]
    fn lexicon_crud_and_versions() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert!(store.lexicons().unwrap().is_empty());
        store
            .create_lexicon(Lexicon::create("disease", &["fever"], "m").unwrap())
            .unwrap();
        let err = store
            .create_lexicon(Lexicon::create("disease", &["plague"], "m").unwrap())
            .unwrap_err();
        assert_eq!(err.code(), "CONFLICT");
        assert_eq!(store.lexicon("nope").unwrap_err().code(), "NOT_FOUND");
        assert_eq!(store.lexicon("../x").unwrap_err().code(), "VALIDATION");

        let err = store
            .update_lexicon("disease", Some(5), |_| Ok(()))
            .unwrap_err();
        assert_eq!(err.code(), "VERSION_CONFLICT");
        // A failing closure writes nothing.
        let err = store
            .update_lexicon("disease", Some(0), |l| {
                l.record_decisions(&["x".to_string()], &[]).map(|_| ())
            })
            .unwrap_err();
        assert_eq!(err.code(), "VALIDATION");
        assert_eq!(store.lexicon("disease").unwrap().version(), 0);
        assert_eq!(store.lexicons().unwrap().len(), 1);
    }

    #[test]
    fn subcorpus_crud() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let ranking = vec![RankedResult {
            doc_id: "m01".into(),
            score: 0.5,
            matched_terms: [("fever".to_string(), 2)].into(),
        }];
        let sub = SubCorpus::new("s", "l", ranking, MetadataFilter::default()).unwrap();
        store.create_subcorpus(sub.clone()).unwrap();
        assert_eq!(store.create_subcorpus(sub).unwrap_err().code(), "CONFLICT");
        let (s, changed) = store
            .update_subcorpus("s", Some(0), |s| s.exclude_document("m01"))
            .unwrap();
        assert!(changed);
        assert_eq!(s.version(), 1);
        assert_eq!(store.subcorpus("s").unwrap(), s);
        assert_eq!(
            store
                .update_subcorpus("s", Some(0), |s| s.include_document("m01"))
                .unwrap_err()
                .code(),
            "VERSION_CONFLICT"
        );
    }
}
