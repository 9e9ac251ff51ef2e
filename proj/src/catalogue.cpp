#include "intelguard/catalogue.hpp"

#include "intelguard/error.hpp"
#include "intelguard/serialization.hpp"
#include "intelguard/text_util.hpp"

#ifndef INTELGUARD_DATA_DIR
#define INTELGUARD_DATA_DIR "data"
#endif

namespace intelguard {

std::string default_catalogue_path() { return std::string(INTELGUARD_DATA_DIR) + "/sensitive_apis.json"; }

SensitiveApiCatalogue load_catalogue(const std::string& path) {
    const Json j = Json::parse(text::read_file(path), nullptr, false);
    if (j.is_discarded()) throw SchemaError("catalogue " + path + " is not valid JSON");
    auto catalogue = j.get<SensitiveApiCatalogue>();
    if (auto problems = validate_catalogue(catalogue); !problems.empty()) {
        throw SchemaError("catalogue " + path + ": " + problems.front());
    }
    return catalogue;
}

std::optional<SensitiveApi> match_call(const SensitiveApiCatalogue& catalogue, std::string_view target,
                                       Language language) {
    std::optional<SensitiveApi> best;
    for (const auto& api : catalogue.entries) {
        if (api.language != language) continue;
        const auto& mod = api.module_pattern;
        if (api.api_name == "*" && target == mod) {
            // Calling the module object itself, e.g. axios(url).
            if (!best || mod.size() > best->module_pattern.size()) best = api;
            continue;
        }
        if (target.size() <= mod.size() || target.compare(0, mod.size(), mod) != 0 || target[mod.size()] != '.') {
            continue;
        }
        const std::string_view member = target.substr(mod.size() + 1);
        if (api.api_name == member) return api;
        if (api.api_name == "*" && (!best || mod.size() > best->module_pattern.size())) best = api;
    }
    return best;
}

std::optional<SensitiveApi> match_reference(const SensitiveApiCatalogue& catalogue, std::string_view target,
                                            Language language) {
    return match_call(catalogue, target, language);
}

}  // namespace intelguard
