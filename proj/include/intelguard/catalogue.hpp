#pragma once

/**
 * @file catalogue.hpp
 * @brief Loading and matching the sensitive-API catalogue.
 *
 * Call targets are dotted paths such as "os.system", "urllib.request.urlopen"
 * or "child_process.exec". Names bound by neither an import nor a local
 * definition resolve to "builtins.<name>" (Python) or "global.<name>"
 * (JavaScript), so eval/exec/open are catalogued under those modules.
 */

#include <optional>
#include <string>
#include <string_view>

#include "intelguard/core_model.hpp"

namespace intelguard {

/// Path of the catalogue shipped in data/.
std::string default_catalogue_path();

/// Throws InputError when unreadable and SchemaError when the catalogue
/// violates its invariants.
SensitiveApiCatalogue load_catalogue(const std::string& path);

/// Exact (module, api) matches win over wildcard ones; among wildcards the
/// longest module pattern wins. A wildcard entry also matches a call of the
/// module object itself.
std::optional<SensitiveApi> match_call(const SensitiveApiCatalogue& catalogue, std::string_view target,
                                       Language language);

/// A module or function object handed to other code. Same rule as calls:
/// a catalogued function, or a module that has a wildcard entry.
std::optional<SensitiveApi> match_reference(const SensitiveApiCatalogue& catalogue, std::string_view target,
                                            Language language);

}  // namespace intelguard
