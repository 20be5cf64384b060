/// Simple (one-to-one) case folding of a single character.
pub fn fold_char(c: char) -> char {
    match c {
        'ς' => 'σ',
        'ſ' => 's',
        'ϐ' => 'β',
        'ϑ' => 'θ',
        'ϕ' => 'φ',
        'ϖ' => 'π',
        'ϰ' => 'κ',
        'ϱ' => 'ρ',
        'ϵ' => 'ε',
        'ẛ' => 'ṡ',
        'ι' => 'ι',
        _ => {
            let mut lower = c.to_lowercase();
            match (lower.next(), lower.next()) {
                (Some(l), None) => l,
                // multi-character lowercase forms have no simple folding
                _ => c,
            }
        }
    }
}

pub fn fold_case(s: &str) -> String {
    s.chars().map(fold_char).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_matches_lowercase() {
        for b in 0u8..128 {
            let c = b as char;
            assert_eq!(fold_char(c), c.to_ascii_lowercase());
        }
    }

    #[test]
    fn greek_and_special_forms() {
        assert_eq!(fold_case("ΟΔΟΣ"), fold_case("οδος"));
        assert_eq!(fold_case("ὀδός"), "ὀδόσ");
        assert_eq!(fold_char('ſ'), 's');
        assert_eq!(fold_char('K'), 'k');
        assert_eq!(fold_char('İ'), 'İ');
        assert_eq!(fold_case("Straße"), "straße");
    }
}
