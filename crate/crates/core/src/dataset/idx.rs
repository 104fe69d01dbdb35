use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{open_input, Dataset, FeatureColumn, Labels};
use crate::{Error, Matrix, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Loads an IDX image/label file pair (MNIST layout). Each image becomes one
/// row of `rows * cols` pixels scaled to `[0, 1]`.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let images = read_all(images_path)?;
    let labels = read_all(labels_path)?;

    let mut img = Cursor::new(&images, images_path);
    img.magic(IMAGES_MAGIC)?;
    let count = img.u32()? as usize;
    let rows = img.u32()? as usize;
    let cols = img.u32()? as usize;
    let pixels = img.rest(count * rows * cols)?;

    let mut lab = Cursor::new(&labels, labels_path);
    lab.magic(LABELS_MAGIC)?;
    let label_count = lab.u32()? as usize;
    let label_bytes = lab.rest(label_count)?;

    if label_count != count {
        return Err(Error::DimensionMismatch {
            expected: count,
            found: label_count,
        });
    }

    let width = rows * cols;
    let data = pixels.iter().map(|&b| f64::from(b) / 255.0).collect();
    let features = Matrix::from_vec(count, width, data)?;
    let ids: Vec<usize> = label_bytes.iter().map(|&b| b as usize).collect();
    let n_classes = ids.iter().max().map_or(10, |&m| (m + 1).max(10));
    let columns = (0..width).map(|j| FeatureColumn::numeric(format!("px{j}"))).collect();
    let names = (0..n_classes).map(|c| c.to_string()).collect();
    Dataset::new(features, Labels::Class(ids), columns, "label", Some(names))
}

/// Writes a dataset of pixel intensities in `[0, 1]` as an IDX pair.
/// Pixels are stored as `round(255 * v)`.
pub fn write_idx(
    ds: &Dataset,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    rows: usize,
    cols: usize,
) -> Result<()> {
    if rows * cols != ds.n_features() {
        return Err(Error::DimensionMismatch {
            expected: ds.n_features(),
            found: rows * cols,
        });
    }
    let Labels::Class(ids) = ds.labels() else {
        return Err(Error::WrongTask("IDX labels must be class ids".into()));
    };
    let mut image_bytes = Vec::with_capacity(16 + ds.n_rows() * rows * cols);
    image_bytes.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for dim in [ds.n_rows(), rows, cols] {
        image_bytes.extend_from_slice(&dim_u32(dim)?.to_be_bytes());
    }
    for &v in ds.features().as_slice() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("pixel value {v} outside [0, 1]")));
        }
        image_bytes.push((v * 255.0).round() as u8);
    }
    let mut label_bytes = Vec::with_capacity(8 + ids.len());
    label_bytes.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    label_bytes.extend_from_slice(&dim_u32(ids.len())?.to_be_bytes());
    for &id in ids {
        let b = u8::try_from(id).map_err(|_| Error::InvalidParameter(format!("label {id} does not fit a byte")))?;
        label_bytes.push(b);
    }
    write_all(images_path.as_ref(), &image_bytes)?;
    write_all(labels_path.as_ref(), &label_bytes)
}

fn dim_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::InvalidParameter(format!("dimension {n} exceeds u32")))
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    open_input(path)?
        .read_to_end(&mut buf)
        .map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8], path: &'a Path) -> Self {
        Cursor { bytes, pos: 0, path }
    }

    fn u32(&mut self) -> Result<u32> {
        let end = self.pos + 4;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Truncated(format!("{}: header ends early", self.path.display())))?;
        self.pos = end;
        Ok(u32::from_be_bytes(chunk.try_into().expect("4 bytes")))
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let found = self.u32()?;
        if found != expected {
            return Err(Error::BadMagic { expected, found });
        }
        Ok(())
    }

    fn rest(&mut self, len: usize) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.pos;
        if available < len {
            return Err(Error::Truncated(format!(
                "{}: expected {len} data bytes, found {available}",
                self.path.display()
            )));
        }
        if available > len {
            return Err(Error::parse(
                self.path,
                0,
                format!("{} trailing bytes", available - len),
            ));
        }
        Ok(&self.bytes[self.pos..])
    }
}
