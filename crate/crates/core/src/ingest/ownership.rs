use super::diff::EditScript;
use super::types::OwnershipMap;
use super::IngestError;

/// Replays one edit script on the line owners of `path`.
///
/// A file missing from the map is treated as empty. Deleted lines lose their
/// owner, inserted lines belong to `author_key`.
pub fn update_ownership(
    ownership: &mut OwnershipMap,
    path: &str,
    script: &EditScript,
    author_key: &str,
) -> Result<(), IngestError> {
    let old = ownership.get(path).unwrap_or(&[]);
    if old.len() != script.old_len {
        return Err(IngestError::OwnershipMismatch {
            path: path.to_string(),
            tracked: old.len(),
            expected: script.old_len,
        });
    }
    let mut owners = Vec::with_capacity(script.new_len);
    let mut cursor = 0;
    for h in &script.hunks {
        owners.extend_from_slice(&old[cursor..h.old_start]);
        owners.extend(std::iter::repeat_n(author_key.to_string(), h.inserted));
        cursor = h.old_start + h.deleted;
    }
    owners.extend_from_slice(&old[cursor..]);
    debug_assert_eq!(owners.len(), script.new_len);
    ownership.insert(path, owners);
    Ok(())
}
