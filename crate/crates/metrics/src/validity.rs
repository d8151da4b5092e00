use rayon::prelude::*;
use render::is_renderable;
use sem_core::parse_sequence;

/// True when the text fails to parse or does not render to a valid solid.
pub fn is_invalid(sequence: &str) -> bool {
    match parse_sequence(sequence) {
        Ok(model) => !is_renderable(&model).is_valid,
        Err(_) => true,
    }
}

/// Percentage of sequences that are invalid; 0 for an empty input.
pub fn invalidity_ratio<S: AsRef<str> + Sync>(sequences: &[S]) -> f64 {
    if sequences.is_empty() {
        return 0.0;
    }
    let bad = sequences.par_iter().filter(|s| is_invalid(s.as_ref())).count();
    100.0 * bad as f64 / sequences.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "line 8 8 <curve_end> line 56 8 <curve_end> line 56 56 <curve_end> line 8 56 <curve_end> \
        <loop_end> <face_end> <sketch_end> add 48 16 32 32 32 63 32 32 32 63 32 32 32 63 32 32 32";

    #[test]
    fn one_broken_of_four() {
        let seqs = [SQUARE, SQUARE, "line 8 8", SQUARE];
        assert_eq!(invalidity_ratio(&seqs), 25.0);
        assert_eq!(invalidity_ratio::<&str>(&[]), 0.0);
    }

    #[test]
    fn flat_extrusion_is_invalid() {
        let flat = SQUARE.replace("add 48 16", "add 30 30");
        assert!(is_invalid(&flat));
        assert!(!is_invalid(SQUARE));
    }
}
