#pragma once

// Report files are the service's own responses written to disk, so a
// report and a running service over the same snapshot agree byte for byte.

#include "gnndiag/service/api.hpp"

#include <filesystem>
#include <vector>

namespace gnndiag {

struct ReportFile {
    std::string name;
    std::string target;  // API request the file holds the response of
};

inline std::string join_axes(const std::vector<std::string>& axes) {
    std::string s;
    for (const auto& a : axes) s += (s.empty() ? "" : ",") + a;
    return s;
}

inline std::vector<ReportFile> report_files(const std::vector<std::string>& axes = default_parallel_sets_axes()) {
    std::vector<ReportFile> files = {{"meta.json", "/api/meta"},
                                     {"layout.json", "/api/layout"},
                                     {"parallel_sets.json", "/api/parallel-sets?selection=all&axes=" + join_axes(axes)}};
    for (PlaneId p : kAllPlanes)
        files.push_back({"projection_" + std::string(to_string(p)) + ".json",
                         "/api/projection?selection=all&plane=" + std::string(to_string(p))});
    return files;
}

/// Writes every report file plus binning.json into dir.  Returns the file
/// names in write order.
inline std::vector<std::string> write_report(Api& api, const std::filesystem::path& dir,
                                             const std::vector<std::string>& axes = default_parallel_sets_axes()) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    for (const auto& f : report_files(axes)) {
        const auto res = api.get(f.target);
        if (res.status != 200) throw ValidationError(f.target + " failed: " + res.body);
        write_text_file(dir / f.name, res.body);
        written.push_back(f.name);
    }
    write_text_file(dir / "binning.json", binning_to_json(api.snapshot().binning).dump(1) + "\n");
    written.push_back("binning.json");
    return written;
}

} // namespace gnndiag
