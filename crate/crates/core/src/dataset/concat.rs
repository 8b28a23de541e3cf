use ndarray::{concatenate, Axis};

use super::bundle::{FeatureBundle, FeatureView};
use crate::error::{Error, Result};

/// Joins the named views column-wise, in list order. The result is named by
/// joining the source names with `+`.
pub fn concatenate_views(bundle: &FeatureBundle, view_names: &[impl AsRef<str>]) -> Result<FeatureView> {
    let views = view_names
        .iter()
        .map(|n| bundle.view(n.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    concatenate_view_list(&views)
}

pub fn concatenate_view_list(views: &[&FeatureView]) -> Result<FeatureView> {
    let Some(first) = views.first() else {
        return Err(Error::Empty("view list".into()));
    };
    for v in views {
        if v.n_samples() != first.n_samples() {
            return Err(Error::RowCountMismatch {
                view: v.name().to_string(),
                expected: first.n_samples(),
                found: v.n_samples(),
            });
        }
    }
    let name = views.iter().map(|v| v.name()).collect::<Vec<_>>().join("+");
    let parts: Vec<_> = views.iter().map(|v| v.matrix().view()).collect();
    let joined = concatenate(Axis(1), &parts).expect("row counts checked");
    FeatureView::new(name, joined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ClassLabel;
    use ndarray::Array2;

    fn bundle(widths: &[usize]) -> FeatureBundle {
        let views = widths
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                FeatureView::new(format!("v{i}"), Array2::from_elem((2, w), i as f64)).unwrap()
            })
            .collect();
        FeatureBundle::new(
            "t",
            vec![ClassLabel { id: 0, name: "a".into() }, ClassLabel { id: 1, name: "b".into() }],
            vec!["s0".into(), "s1".into()],
            vec![0, 1],
            views,
        )
        .unwrap()
    }

    #[test]
    fn widths_add_and_order_is_kept() {
        let b = bundle(&[4096, 2048]);
        let out = concatenate_views(&b, &["v0", "v1"]).unwrap();
        assert_eq!(out.width(), 6144);
        assert!(out.matrix().row(0).iter().take(4096).all(|&x| x == 0.0));
        assert!(out.matrix().row(1).iter().skip(4096).all(|&x| x == 1.0));
        assert_eq!(out.name(), "v0+v1");
    }

    #[test]
    fn single_view_is_identity() {
        let b = bundle(&[3, 5]);
        let out = concatenate_views(&b, &["v1"]).unwrap();
        assert_eq!(out.matrix(), b.view("v1").unwrap().matrix());
    }

    #[test]
    fn seven_extractor_widths() {
        let b = bundle(&[1280, 4096, 2048, 2048, 4032, 2048, 2048]);
        let names: Vec<String> = (0..7).map(|i| format!("v{i}")).collect();
        assert_eq!(concatenate_views(&b, &names).unwrap().width(), 17600);
    }

    #[test]
    fn unknown_view() {
        let b = bundle(&[1]);
        assert!(matches!(concatenate_views(&b, &["nope"]), Err(Error::UnknownView(_))));
    }
}
