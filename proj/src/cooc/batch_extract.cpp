#include "coocnet/cooc.hpp"
#include "coocnet/error.hpp"
#include "coocnet/parallel.hpp"

#include <optional>
#include <variant>

namespace coocnet::cooc {

BatchResult batch_extract(std::span<const ImageRecord> records, const CoOccConfig& cfg,
                          const ExtractOptions& options) {
  validate(cfg);
  if (options.jpeg_quality && (*options.jpeg_quality < 1 || *options.jpeg_quality > 100)) {
    throw Error(Errc::InvalidConfig, "jpeg quality must be in [1, 100]");
  }

  std::vector<std::variant<std::monostate, CoOccurrenceTensor, std::string>> slots(records.size());
  parallel_for(records.size(), options.workers, [&](std::size_t i, int) {
    try {
      auto img = imaging::load_image(records[i].path);
      if (options.jpeg_quality) img = imaging::jpeg_recompress(img, *options.jpeg_quality);
      slots[i] = cooccur_tensor(img, cfg);
    } catch (const std::exception& e) {
      slots[i] = std::string(e.what());
    }
  });

  BatchResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (auto* tensor = std::get_if<CoOccurrenceTensor>(&slots[i])) {
      result.samples.push_back({i, std::move(*tensor), records[i].label});
    } else {
      result.failures.push_back({i, records[i].path, std::get<std::string>(slots[i])});
    }
  }
  return result;
}

}  // namespace coocnet::cooc
