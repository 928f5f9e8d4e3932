// SPDX-License-Identifier: Apache-2.0

use tokio::task::JoinHandle;

/// Aborts the task when dropped, so a cancelled connection future does not
/// leave its reader and writer halves running.
pub(crate) struct AbortOnDrop(pub(crate) JoinHandle<()>);

impl Drop for AbortOnDrop {
    fn drop(&mut self) {
        self.0.abort();
    }
}
