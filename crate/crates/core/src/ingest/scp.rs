use serde::{Deserialize, Serialize};

/// Diagnostic superclass of an SCP-ECG statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Superclass {
    #[serde(rename = "NORM")]
    Norm,
    #[serde(rename = "MI")]
    Mi,
    #[serde(rename = "STTC")]
    Sttc,
    #[serde(rename = "CD")]
    Cd,
    #[serde(rename = "HYP")]
    Hyp,
}

impl Superclass {
    pub const ALL: [Superclass; 5] = [
        Superclass::Norm,
        Superclass::Mi,
        Superclass::Sttc,
        Superclass::Cd,
        Superclass::Hyp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Superclass::Norm => "NORM",
            Superclass::Mi => "MI",
            Superclass::Sttc => "STTC",
            Superclass::Cd => "CD",
            Superclass::Hyp => "HYP",
        }
    }
}

impl std::fmt::Display for Superclass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

use Superclass::*;

// The 44 diagnostic statements of the PTB-XL statement table with their
// `diagnostic_class`. Rhythm and form statements have no superclass.
static DIAGNOSTIC_STATEMENTS: [(&str, Superclass); 44] = [
    ("NORM", Norm),
    // myocardial infarction
    ("IMI", Mi),
    ("ASMI", Mi),
    ("ILMI", Mi),
    ("AMI", Mi),
    ("ALMI", Mi),
    ("INJAS", Mi),
    ("LMI", Mi),
    ("INJAL", Mi),
    ("IPLMI", Mi),
    ("IPMI", Mi),
    ("INJIN", Mi),
    ("INJLA", Mi),
    ("PMI", Mi),
    ("INJIL", Mi),
    // ST/T change
    ("NDT", Sttc),
    ("NST_", Sttc),
    ("DIG", Sttc),
    ("LNGQT", Sttc),
    ("ISC_", Sttc),
    ("ISCAL", Sttc),
    ("ISCIN", Sttc),
    ("ISCIL", Sttc),
    ("ISCAS", Sttc),
    ("ISCLA", Sttc),
    ("ANEUR", Sttc),
    ("EL", Sttc),
    ("ISCAN", Sttc),
    // conduction disturbance
    ("LAFB", Cd),
    ("IRBBB", Cd),
    ("1AVB", Cd),
    ("IVCD", Cd),
    ("CRBBB", Cd),
    ("CLBBB", Cd),
    ("LPFB", Cd),
    ("WPW", Cd),
    ("ILBBB", Cd),
    ("3AVB", Cd),
    ("2AVB", Cd),
    // hypertrophy
    ("LVH", Hyp),
    ("LAO/LAE", Hyp),
    ("RVH", Hyp),
    ("RAO/RAE", Hyp),
    ("SEHYP", Hyp),
];

/// Superclass of a diagnostic SCP code, `None` for non-diagnostic codes.
pub fn superclass_of(code: &str) -> Option<Superclass> {
    DIAGNOSTIC_STATEMENTS
        .iter()
        .find(|(c, _)| *c == code)
        .map(|&(_, s)| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        assert_eq!(superclass_of("NORM"), Some(Norm));
        assert_eq!(superclass_of("IMI"), Some(Mi));
        assert_eq!(superclass_of("LAO/LAE"), Some(Hyp));
        assert_eq!(superclass_of("1AVB"), Some(Cd));
        assert_eq!(superclass_of("SR"), None);
        assert_eq!(superclass_of("AFIB"), None);
    }

    #[test]
    fn table_sizes() {
        let count = |s| DIAGNOSTIC_STATEMENTS.iter().filter(|(_, c)| *c == s).count();
        assert_eq!(
            [count(Norm), count(Mi), count(Sttc), count(Cd), count(Hyp)],
            [1, 14, 13, 11, 5]
        );
        let mut codes: Vec<_> = DIAGNOSTIC_STATEMENTS.iter().map(|(c, _)| c).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), 44);
    }
}
