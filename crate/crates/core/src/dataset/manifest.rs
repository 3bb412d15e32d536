//! Line-delimited export manifests.
//!
//! ```text
//! scramblekit-manifest v1 mode=<m> bx=<n> by=<n> epoch=<n>
//! idx=<n> label=<n> s=<n> path=<relpath>
//! ```
//!
//! With keys included (test use only) the header gains `master_seed=<n>` and every
//! entry gains `key=<n>`.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::BlockSpec;

pub const MAGIC: &str = "scramblekit-manifest";
pub const FORMAT_VERSION: u32 = 1;

/// How training keys are applied in an epoch. `Test` marks exports made with `K_T`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    /// One key per image, slot `s` drawn per epoch.
    #[default]
    Select,
    /// Every image encrypted under all `N` keys.
    Expand,
    Test,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Select => "select",
            Mode::Expand => "expand",
            Mode::Test => "test",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "select" => Ok(Mode::Select),
            "expand" => Ok(Mode::Expand),
            "test" => Ok(Mode::Test),
            other => Err(format!(
                "unknown mode `{other}` (expected select, expand or test)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub source_index: usize,
    pub label: u8,
    /// Key slot used; 0 for test-key exports.
    pub s_used: usize,
    pub path: String,
    pub key: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub format_version: u32,
    pub mode: Mode,
    pub block_spec: BlockSpec,
    pub epoch: u64,
    pub master_seed: Option<u64>,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(mode: Mode, block_spec: BlockSpec, epoch: u64) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            mode,
            block_spec,
            epoch,
            master_seed: None,
            entries: Vec::new(),
        }
    }

    pub fn master_seed_present(&self) -> bool {
        self.master_seed.is_some()
    }

    /// Drops all key material.
    pub fn strip_keys(&mut self) {
        self.master_seed = None;
        for e in &mut self.entries {
            e.key = None;
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{MAGIC} v{} mode={} bx={} by={} epoch={}",
            self.format_version,
            self.mode,
            self.block_spec.block_width(),
            self.block_spec.block_height(),
            self.epoch
        );
        if let Some(seed) = self.master_seed {
            let _ = write!(out, " master_seed={seed}");
        }
        out.push('\n');
        for e in &self.entries {
            let _ = write!(
                out,
                "idx={} label={} s={} path={}",
                e.source_index, e.label, e.s_used, e.path
            );
            if let Some(key) = e.key {
                let _ = write!(out, " key={key}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Manifest {
            line: 1,
            reason: "empty manifest".into(),
        })?;
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some(MAGIC) {
            return Err(Error::Manifest {
                line: 1,
                reason: format!("missing `{MAGIC}` header"),
            });
        }
        let version = tokens
            .next()
            .and_then(|v| v.strip_prefix('v'))
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or(Error::Manifest {
                line: 1,
                reason: "missing format version".into(),
            })?;
        if version != FORMAT_VERSION {
            return Err(Error::Manifest {
                line: 1,
                reason: format!("unsupported format version {version}"),
            });
        }
        let fields = Fields::parse(tokens, 1)?;
        let spec =
            BlockSpec::new(fields.num("bx")?, fields.num("by")?).map_err(|e| Error::Manifest {
                line: 1,
                reason: e.to_string(),
            })?;
        let mut manifest = Manifest::new(fields.parsed("mode")?, spec, fields.num("epoch")?);
        manifest.master_seed = fields.opt_num("master_seed")?;

        for (i, line) in lines {
            let f = Fields::parse(line.split_whitespace(), i + 1)?;
            manifest.entries.push(ManifestEntry {
                source_index: f.num("idx")?,
                label: f.num("label")?,
                s_used: f.num("s")?,
                path: f.get("path")?.to_string(),
                key: f.opt_num("key")?,
            });
        }
        Ok(manifest)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

struct Fields<'a> {
    line: usize,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn parse(tokens: impl Iterator<Item = &'a str>, line: usize) -> Result<Self> {
        let pairs = tokens
            .map(|t| {
                t.split_once('=').ok_or(Error::Manifest {
                    line,
                    reason: format!("expected key=value, got `{t}`"),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { line, pairs })
    }

    fn find(&self, key: &str) -> Option<&'a str> {
        self.pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    fn get(&self, key: &str) -> Result<&'a str> {
        self.find(key).ok_or(Error::Manifest {
            line: self.line,
            reason: format!("missing field `{key}`"),
        })
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.parse().map_err(|e: T::Err| Error::Manifest {
            line: self.line,
            reason: format!("field `{key}`: {e}"),
        })
    }

    fn num<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.parsed(key)
    }

    fn opt_num<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.find(key) {
            None => Ok(None),
            Some(_) => self.num(key).map(Some),
        }
    }
}
