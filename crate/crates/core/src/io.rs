//! PNG and binary PPM/PGM decoding, PNG encoding.

use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::imgops::{BinaryImage, GrayImage, RgbImage};

fn decode_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::ImageDecode {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn format_for(path: &Path, bytes: &[u8]) -> Option<ImageFormat> {
    match image::guess_format(bytes) {
        Ok(f @ (ImageFormat::Png | ImageFormat::Pnm)) => Some(f),
        _ => match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if ext == "png" => Some(ImageFormat::Png),
            Some(ext) if matches!(ext.as_str(), "ppm" | "pgm" | "pnm") => Some(ImageFormat::Pnm),
            _ => None,
        },
    }
}

fn load_dynamic(path: &Path) -> Result<DynamicImage> {
    let bytes = std::fs::read(path)?;
    let format = format_for(path, &bytes)
        .ok_or_else(|| decode_error(path, "unsupported format (expected PNG, PPM or PGM)"))?;
    image::load_from_memory_with_format(&bytes, format).map_err(|e| decode_error(path, e))
}

/// Loads a PNG, PPM (P6) or PGM (P5) file as RGB. Gray inputs are expanded.
pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let rgb = load_dynamic(path)?.to_rgb8();
    let (w, h) = rgb.dimensions();
    RgbImage::from_raw(w as usize, h as usize, rgb.into_raw())
}

pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let gray = load_dynamic(path)?.to_luma8();
    let (w, h) = gray.dimensions();
    GrayImage::from_raw(w as usize, h as usize, gray.into_raw())
}

fn save(path: &Path, buf: &[u8], w: usize, h: usize, color: image::ExtendedColorType) -> Result<()> {
    image::save_buffer_with_format(path, buf, w as u32, h as u32, color, ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::Io(io),
            other => Error::InvalidArgument(other.to_string()),
        })
}

pub fn save_rgb_png(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    save(
        path.as_ref(),
        img.as_raw(),
        img.width(),
        img.height(),
        image::ExtendedColorType::Rgb8,
    )
}

pub fn save_gray_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    save(
        path.as_ref(),
        img.as_raw(),
        img.width(),
        img.height(),
        image::ExtendedColorType::L8,
    )
}

/// Foreground is written black, background white.
pub fn save_binary_png(img: &BinaryImage, path: impl AsRef<Path>) -> Result<()> {
    save_gray_png(&img.to_gray(), path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        let img = RgbImage::from_fn(5, 3, |x, y| [x as u8 * 40, y as u8 * 70, 9]);
        save_rgb_png(&img, &path).unwrap();
        assert_eq!(load_rgb(&path).unwrap(), img);
    }

    #[test]
    fn reads_binary_ppm_and_pgm() {
        let dir = tempfile::tempdir().unwrap();
        let ppm = dir.path().join("a.ppm");
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 200, 100, 50]);
        std::fs::write(&ppm, bytes).unwrap();
        let img = load_rgb(&ppm).unwrap();
        assert_eq!(img.get(0, 0), [1, 2, 3]);
        assert_eq!(img.get(1, 0), [200, 100, 50]);

        let pgm = dir.path().join("b.pgm");
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 64, 128, 255]);
        std::fs::write(&pgm, bytes).unwrap();
        assert_eq!(load_gray(&pgm).unwrap().as_raw(), &[0, 64, 128, 255]);
        assert_eq!(load_rgb(&pgm).unwrap().get(1, 0), [64, 64, 64]);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_rgb("/nonexistent/nowhere.png").unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    #[test]
    fn garbage_is_decode_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        std::fs::write(&path, b"not an image").unwrap();
        assert!(matches!(load_rgb(&path).unwrap_err(), Error::ImageDecode { .. }));
    }
}
