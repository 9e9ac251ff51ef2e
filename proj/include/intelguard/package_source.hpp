#pragma once

/**
 * @file package_source.hpp
 * @brief Target packages as in-memory source trees.
 *
 * A package is loaded from an unpacked directory or from an archive
 * (.tar, .tar.gz, .tgz, .zip, .whl). Archive members share a common top
 * directory in both ecosystems; it is stripped so paths are relative to
 * the package root.
 */

#include <string>
#include <utility>
#include <vector>

#include "intelguard/core_model.hpp"

namespace intelguard {

struct PackageFile {
    std::string path;  // relative, '/'-separated
    std::string text;
    Language language = Language::Other;

    bool operator==(const PackageFile&) const = default;
};

struct PackageSource {
    std::string package_id;
    std::vector<PackageFile> files;          // source files only, sorted by path
    std::vector<std::string> install_hooks;  // scripts run at install time, sorted

    bool operator==(const PackageSource&) const = default;
};

/// Language by extension: .py is Python; .js/.cjs/.mjs are JavaScript.
Language language_for_path(const std::string& path);

/// Builds a package from raw (path, bytes) members. Manifests (package.json,
/// setup.py, PKG-INFO, pyproject.toml) supply the id and install hooks;
/// fallback_id is used when none names the package. Throws InputError when
/// no source file is present or a path repeats.
PackageSource package_from_files(std::vector<std::pair<std::string, std::string>> members,
                                 const std::string& fallback_id);

/// Loads a directory or archive. Throws InputError when the path is missing
/// or unreadable.
PackageSource load_package(const std::string& path);

/// Archive members as (path, bytes), common top directory not yet stripped.
std::vector<std::pair<std::string, std::string>> read_archive(const std::string& path);

}  // namespace intelguard
