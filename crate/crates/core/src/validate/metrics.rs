use serde::{Deserialize, Serialize};

use crate::geometry::PixelBox;

use super::{Result, ValidateError};

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(ValidateError::LengthMismatch { a: a.len(), b: b.len() });
    }
    Ok(())
}

/// Product-moment correlation of two equal-length series.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    if a.len() < 2 {
        return Err(ValidateError::LengthMismatch { a: a.len(), b: 2 });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(ValidateError::ConstantSeries);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

pub fn max_abs_error(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Intersection over union; 0 for disjoint or empty boxes.
pub fn iou(a: &PixelBox, b: &PixelBox) -> f64 {
    let w = (a.right().min(b.right()) - a.x.max(b.x)).max(0.0);
    let h = (a.bottom().min(b.bottom()) - a.y.max(b.y)).max(0.0);
    let inter = w * h;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    if a == b {
        return 1.0;
    }
    // Distinct boxes stay below 1 even when the ratio rounds up.
    (inter / union).min(1.0 - f64::EPSILON / 2.0)
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        if values.is_empty() {
            return Summary::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Summary {
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        let a = [1.0, 2.0, 3.0, 5.0];
        assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!((pearson(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
        // 3 / sqrt(2 * 14/3)
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 3.0 / (2.0f64 * 14.0 / 3.0).sqrt()).abs() < 1e-12);
        assert!((r - 0.98198).abs() < 1e-5);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(ValidateError::ConstantSeries)));
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(ValidateError::LengthMismatch { .. })));
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(mse(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 2.5);
        assert!(matches!(mse(&[1.0], &[1.0, 2.0]), Err(ValidateError::LengthMismatch { .. })));
        assert_eq!(max_abs_error(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 2.0);
    }

    #[test]
    fn iou_examples() {
        let a = PixelBox::new(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &PixelBox::new(20.0, 0.0, 5.0, 5.0)), 0.0);
        assert_eq!(iou(&a, &PixelBox::new(10.0, 0.0, 5.0, 5.0)), 0.0);
        let half = iou(&a, &PixelBox::new(5.0, 0.0, 10.0, 10.0));
        assert!((half - 50.0 / 150.0).abs() < 1e-12);
    }

    #[test]
    fn summary() {
        let s = Summary::of(&[1.0, 3.0]);
        assert_eq!((s.mean, s.std, s.min, s.max), (2.0, 1.0, 1.0, 3.0));
    }

    fn boxes() -> impl Strategy<Value = PixelBox> {
        (-50.0..50.0f64, -50.0..50.0f64, 0.5..60.0f64, 0.5..60.0f64).prop_map(|(x, y, w, h)| PixelBox::new(x, y, w, h))
    }

    proptest! {
        #[test]
        fn pearson_affine_invariant(
            a in prop::collection::vec(-10.0..10.0f64, 3..60),
            alpha in 0.01..100.0f64,
            beta in -100.0..100.0f64,
        ) {
            let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + (i as f64).sin()).collect();
            if let (Ok(r), Ok(r2)) = (pearson(&a, &b), pearson(&a.iter().map(|v| alpha * v + beta).collect::<Vec<_>>(), &b)) {
                prop_assert!((r - r2).abs() < 1e-9);
                prop_assert!((-1.0..=1.0).contains(&r));
            }
        }

        #[test]
        fn iou_symmetric_and_bounded(a in boxes(), b in boxes()) {
            let x = iou(&a, &b);
            prop_assert_eq!(x, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert_eq!(iou(&a, &a), 1.0);
            if a != b {
                prop_assert!(x < 1.0);
            }
        }

        #[test]
        fn mse_nonnegative(v in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 0..40)) {
            let (a, b): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            prop_assert!(mse(&a, &b).unwrap() >= 0.0);
        }
    }
}
