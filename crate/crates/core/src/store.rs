//! Template file format and the on-disk template database.
//!
//! Layout (all integers little-endian):
//!
//! | field          | size            |
//! |----------------|-----------------|
//! | magic `FBX1`   | 4               |
//! | version        | u16             |
//! | label length   | u8              |
//! | label (UTF-8)  | label length    |
//! | working width  | u16             |
//! | working height | u16             |
//! | feature count  | u32             |
//! | features       | 40 x count      |
//!
//! Each feature is the 32-byte descriptor followed by an 8-byte minutia
//! record: x u16, y u16, angle u16 (units of 2π/65536), kind u8
//! (0 = ending, 1 = bifurcation), one reserved zero byte. That is 320 bits
//! per feature.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::descriptor::{Descriptor256, Template, TEMPLATE_VERSION};
use crate::error::{Error, Result};
use crate::matcher::{match_score, MatchConfig, MatchResult};
use crate::minutiae::{Angle, Minutia, MinutiaKind};

pub const MAGIC: [u8; 4] = *b"FBX1";
pub const FEATURE_BYTES: usize = 40;
pub const FILE_EXTENSION: &str = "fbx";

/// Bytes before the feature records for a label of `label_len` bytes.
pub fn header_size(label_len: usize) -> usize {
    4 + 2 + 1 + label_len + 2 + 2 + 4
}

pub fn serialized_size(t: &Template) -> usize {
    header_size(t.label.len()) + FEATURE_BYTES * t.features.len()
}

pub fn serialize(t: &Template) -> Result<Vec<u8>> {
    let label = t.label.as_bytes();
    if label.len() > 255 {
        return Err(Error::LabelTooLong(label.len()));
    }
    let count = u32::try_from(t.features.len())
        .map_err(|_| Error::InvalidArgument("too many features for one template".into()))?;
    let mut out = Vec::with_capacity(serialized_size(t));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&t.version.to_le_bytes());
    out.push(label.len() as u8);
    out.extend_from_slice(label);
    out.extend_from_slice(&t.working_width.to_le_bytes());
    out.extend_from_slice(&t.working_height.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    for (m, d) in &t.features {
        out.extend_from_slice(&d.0);
        out.extend_from_slice(&m.x.to_le_bytes());
        out.extend_from_slice(&m.y.to_le_bytes());
        out.extend_from_slice(&m.angle.0.to_le_bytes());
        out.push(m.kind.code());
        out.push(0);
    }
    Ok(out)
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, expected_total: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::Length {
                expected: expected_total.max(self.pos + n),
                actual: self.data.len(),
            });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self, expected: usize) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, expected)?.try_into().expect("2 bytes")))
    }
}

pub fn deserialize(data: &[u8]) -> Result<Template> {
    let mut r = Reader { data, pos: 0 };
    let min_header = header_size(0);
    let magic = r.take(4, min_header)?;
    if magic != MAGIC {
        return Err(Error::BadMagic {
            found: magic.try_into().expect("4 bytes"),
        });
    }
    let version = r.u16(min_header)?;
    if version != TEMPLATE_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: TEMPLATE_VERSION,
        });
    }
    let label_len = r.take(1, min_header)?[0] as usize;
    let header = header_size(label_len);
    let label = std::str::from_utf8(r.take(label_len, header)?)
        .map_err(|_| Error::LabelEncoding)?
        .to_owned();
    let working_width = r.u16(header)?;
    let working_height = r.u16(header)?;
    let count = u32::from_le_bytes(r.take(4, header)?.try_into().expect("4 bytes")) as usize;
    let expected = header + FEATURE_BYTES * count;
    if data.len() != expected {
        return Err(Error::Length {
            expected,
            actual: data.len(),
        });
    }
    let mut features = Vec::with_capacity(count);
    for _ in 0..count {
        let rec = r.take(FEATURE_BYTES, expected)?;
        let desc = Descriptor256(rec[..32].try_into().expect("32 bytes"));
        let field = |i: usize| u16::from_le_bytes([rec[32 + i], rec[33 + i]]);
        let kind = MinutiaKind::from_code(rec[38]).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown minutia kind code {}", rec[38]))
        })?;
        features.push((
            Minutia {
                x: field(0),
                y: field(2),
                angle: Angle(field(4)),
                kind,
            },
            desc,
        ));
    }
    Ok(Template {
        version,
        label,
        working_width,
        working_height,
        features,
    })
}

/// How many templates of `features_per_template` features fit in
/// `capacity_bytes`, counting a header with a `label_len`-byte label.
pub fn capacity(capacity_bytes: u64, features_per_template: usize, label_len: usize) -> u64 {
    capacity_bytes / (header_size(label_len) + FEATURE_BYTES * features_per_template) as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbEntry {
    pub id: u64,
    pub label: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranked {
    pub id: u64,
    pub label: String,
    pub result: MatchResult,
}

/// A directory of `<label>.<id>.fbx` files, one template each. Files are
/// written to a hidden temporary name and hard-linked into place, so readers
/// never see a partial template and concurrent writers never share an id.
#[derive(Debug, Clone)]
pub struct TemplateDb {
    root: PathBuf,
}

fn sanitize_label(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "unlabelled".into()
    } else {
        s
    }
}

fn parse_entry_id(name: &str) -> Option<u64> {
    let stem = name.strip_suffix(&format!(".{FILE_EXTENSION}"))?;
    if stem.starts_with('.') {
        return None;
    }
    let (_, id) = stem.rsplit_once('.')?;
    id.parse().ok()
}

impl TemplateDb {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entry_paths(&self) -> Result<Vec<(u64, PathBuf)>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(id) = parse_entry_id(name) {
                out.push((id, entry.path()));
            }
        }
        out.sort();
        Ok(out)
    }

    fn temp_path(&self) -> PathBuf {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos());
        self.root.join(format!(
            ".{}-{}-{}.tmp",
            std::process::id(),
            nanos,
            COUNTER.fetch_add(1, Ordering::Relaxed)
        ))
    }

    /// Writes `t` under the next free id and returns that id.
    pub fn enroll(&self, t: &Template) -> Result<u64> {
        let bytes = serialize(t)?;
        let tmp = self.temp_path();
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        let label = sanitize_label(&t.label);
        let result = (|| {
            let mut id = self.entry_paths()?.last().map_or(1, |(id, _)| id + 1);
            loop {
                let target = self.root.join(format!("{label}.{id:08}.{FILE_EXTENSION}"));
                match fs::hard_link(&tmp, &target) {
                    Ok(()) => return Ok(id),
                    Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => id += 1,
                    Err(e) => return Err(Error::Io(e)),
                }
            }
        })();
        let _ = fs::remove_file(&tmp);
        result
    }

    pub fn list(&self) -> Result<Vec<DbEntry>> {
        self.entry_paths()?
            .into_iter()
            .map(|(id, path)| {
                let t = deserialize(&fs::read(&path)?)?;
                Ok(DbEntry {
                    id,
                    label: t.label,
                    path,
                })
            })
            .collect()
    }

    pub fn load(&self, id: u64) -> Result<Template> {
        let (_, path) = self
            .entry_paths()?
            .into_iter()
            .find(|(i, _)| *i == id)
            .ok_or_else(|| Error::InvalidArgument(format!("no entry with id {id}")))?;
        deserialize(&fs::read(path)?)
    }

    pub fn load_all(&self) -> Result<Vec<(u64, Template)>> {
        self.entry_paths()?
            .into_iter()
            .map(|(id, path)| Ok((id, deserialize(&fs::read(path)?)?)))
            .collect()
    }

    /// Scores `probe` against every entry, best first (ties by id).
    pub fn identify(&self, probe: &Template, cfg: &MatchConfig) -> Result<Vec<Ranked>> {
        Ok(rank(probe, self.load_all()?, cfg))
    }
}

/// Scores `probe` against an in-memory gallery, best first (ties by id).
pub fn rank(probe: &Template, gallery: Vec<(u64, Template)>, cfg: &MatchConfig) -> Vec<Ranked> {
    let mut out: Vec<Ranked> = gallery
        .into_iter()
        .map(|(id, t)| Ranked {
            id,
            result: match_score(probe, &t, cfg),
            label: t.label,
        })
        .collect();
    out.sort_by(|a, b| {
        b.result
            .score
            .total_cmp(&a.result.score)
            .then(a.id.cmp(&b.id))
    });
    out
}
