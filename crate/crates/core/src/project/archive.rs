use std::io::{Cursor, Write};

use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipWriter};

use super::{Project, ProjectError};
use crate::ids::ProjectId;
use crate::ontology::serialize_ontology;

pub fn archive_name(project: &ProjectId, revision: u64) -> String {
    format!("project-{project}-r{revision}.zip")
}

/// Zip of one `<ontology-id>.ofn` per ontology as of `revision`. Entry
/// timestamps are fixed so equal states give byte-identical archives.
pub fn export_revision_archive(project: &Project, revision: u64) -> Result<Vec<u8>, ProjectError> {
    let docs = project.documents_at(revision)?;
    let options = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(DateTime::default());
    let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
    for (id, doc) in docs {
        zip.start_file(format!("{id}.ofn"), options).map_err(|e| ProjectError::Io(e.to_string()))?;
        zip.write_all(serialize_ontology(&doc).as_bytes())?;
    }
    let cursor = zip.finish().map_err(|e| ProjectError::Io(e.to_string()))?;
    Ok(cursor.into_inner())
}
