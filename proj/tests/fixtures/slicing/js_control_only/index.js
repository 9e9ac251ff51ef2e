const { execSync } = require('child_process');

function maybeClean() {
  if (process.env.CLEAN === '1') {
    execSync('rm -rf dist');
  }
}

maybeClean();

module.exports = { maybeClean };
