//! Dataset readers (CSV, IDX) and atomic file output.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use matvar_core::linalg::vec as vec_of;
use matvar_core::{DenseMatrix, MatrixDataset};

use crate::error::{AppError, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Reads one observation per row; each row holds `vec(X_i)` (column-major)
/// with `rows * cols` numeric fields. A single leading header row is skipped
/// when its first field is not numeric.
pub fn read_csv_dataset(path: &Path, rows: usize, cols: usize) -> Result<MatrixDataset> {
    let file = fs::File::open(path).map_err(|e| AppError::io(path, e))?;
    parse_csv_dataset(file, rows, cols)
}

pub fn parse_csv_dataset<R: Read>(input: R, rows: usize, cols: usize) -> Result<MatrixDataset> {
    if rows == 0 || cols == 0 {
        return Err(AppError::Usage("rows and cols must be positive".into()));
    }
    let width = rows * cols;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut vecs: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| AppError::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if idx == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if record.len() != width {
            return Err(AppError::Shape { row, expected: width, found: record.len() });
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(k, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(AppError::Parse {
                    row,
                    column: k + 1,
                    message: format!("not a finite number: {field:?}"),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        vecs.push(values);
    }
    if vecs.is_empty() {
        return Err(AppError::Parse { row: 0, column: 0, message: "no data rows".into() });
    }
    Ok(MatrixDataset::from_vecs(&vecs, rows, cols)?)
}

/// One row per observation holding `vec(X_i)`, 17 significant digits.
pub fn dataset_to_csv(data: &MatrixDataset) -> String {
    let mut out = String::new();
    for x in data.iter() {
        let fields: Vec<String> = vec_of(x).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(AppError::TruncatedFile { declared: offset + 4, found: bytes.len() })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| AppError::io(path, e))
}

/// IDX image file: magic `0x00000803`, count, rows, cols (big-endian u32),
/// then `count * rows * cols` unsigned bytes. Pixels are used raw, in
/// `[0, 255]`.
pub fn read_idx_images(path: &Path) -> Result<MatrixDataset> {
    parse_idx_images(&read_bytes(path)?)
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<MatrixDataset> {
    let magic = be_u32(bytes, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(AppError::BadMagic { expected: IDX_IMAGES_MAGIC, found: magic });
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let size = rows * cols;
    let payload = &bytes[16..];
    if payload.len() < count * size {
        return Err(AppError::TruncatedFile { declared: count * size, found: payload.len() });
    }
    if count == 0 || size == 0 {
        return Err(AppError::Usage("IDX image file holds no images".into()));
    }
    let images = payload
        .chunks_exact(size)
        .take(count)
        .map(|px| DenseMatrix::new(rows, cols, px.iter().map(|&b| f64::from(b)).collect()))
        .collect::<matvar_core::Result<Vec<_>>>()?;
    Ok(MatrixDataset::new(images)?)
}

/// IDX label file: magic `0x00000801`, count, then `count` bytes.
pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    parse_idx_labels(&read_bytes(path)?)
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(AppError::BadMagic { expected: IDX_LABELS_MAGIC, found: magic });
    }
    let count = be_u32(bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() < count {
        return Err(AppError::TruncatedFile { declared: count, found: payload.len() });
    }
    Ok(payload[..count].to_vec())
}

/// A file written to a temporary sibling and renamed into place on
/// [`commit`](PendingFile::commit). Dropping it uncommitted removes the
/// temporary.
pub struct PendingFile {
    tmp: tempfile::NamedTempFile,
    target: std::path::PathBuf,
}

impl PendingFile {
    pub fn new(target: &Path, contents: &[u8]) -> Result<Self> {
        let dir = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::Builder::new()
            .prefix(".matvar-")
            .tempfile_in(dir)
            .map_err(|e| AppError::io(dir, e))?;
        tmp.write_all(contents).map_err(|e| AppError::io(target, e))?;
        tmp.as_file().sync_all().map_err(|e| AppError::io(target, e))?;
        Ok(Self { tmp, target: target.to_path_buf() })
    }

    pub fn commit(self) -> Result<()> {
        let target = self.target;
        self.tmp.persist(&target).map_err(|e| AppError::io(&target, e.error))?;
        Ok(())
    }
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    PendingFile::new(path, contents)?.commit()
}

/// Stages every file first, then renames them all.
pub fn write_all_atomic(files: &[(&Path, &[u8])]) -> Result<()> {
    let pending = files
        .iter()
        .map(|(p, c)| PendingFile::new(p, c))
        .collect::<Result<Vec<_>>>()?;
    pending.into_iter().try_for_each(PendingFile::commit)
}
