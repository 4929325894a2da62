use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use super::{daily_file_name, daily_path, parse_segments, ReadOptions, StoreError, UserIdentity};

/// Where daily files are uploaded to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UploadBackend {
    /// A directory laid out as `<root>/<id>/DD-MM-YYYY.json`.
    Directory(PathBuf),
    /// `PUT {base_url}/{id}/DD-MM-YYYY.json` with a JSON body.
    Http { base_url: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UploadReceipt {
    Stored(PathBuf),
    Put { url: String, status: u16 },
}

/// Uploads one daily file for `date`. The file must parse as segments; a
/// failed transfer is reported and retrying is up to the caller.
pub fn upload(
    local_file: &Path,
    identity: &UserIdentity,
    date: NaiveDate,
    backend: &UploadBackend,
) -> Result<UploadReceipt, StoreError> {
    let bytes = std::fs::read(local_file).map_err(|e| StoreError::io(local_file, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| StoreError::NotSegments(format!("not UTF-8: {e}")))?;
    parse_segments(
        text,
        &ReadOptions {
            date: Some(date),
            utc_offset_s: 0,
        },
    )?;

    match backend {
        UploadBackend::Directory(root) => {
            let target = daily_path(root, identity, date);
            let dir = target.parent().expect("daily paths have a parent");
            std::fs::create_dir_all(dir).map_err(|e| StoreError::io(dir, e))?;
            std::fs::write(&target, &bytes).map_err(|e| StoreError::io(&target, e))?;
            Ok(UploadReceipt::Stored(target))
        }
        UploadBackend::Http { base_url } => {
            let url = format!("{}/{}/{}", base_url.trim_end_matches('/'), identity, daily_file_name(date));
            let response = ureq::put(&url)
                .header("Content-Type", "application/json")
                .send(&bytes[..])
                .map_err(|e| StoreError::Upload {
                    target: url.clone(),
                    reason: e.to_string(),
                })?;
            Ok(UploadReceipt::Put {
                status: response.status().as_u16(),
                url,
            })
        }
    }
}
