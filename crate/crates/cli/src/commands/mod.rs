pub mod bounds;
pub mod boxdim;
pub mod fourier;
pub mod gamma;
pub mod inflation;
pub mod search;
pub mod verify_all;

/// Digits as `{0, 2}`.
pub(crate) fn digit_list<T: std::fmt::Display>(digits: &[T]) -> String {
    let parts: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}
