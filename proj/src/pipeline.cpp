#include "corrseg/pipeline.hpp"

namespace corrseg {

PipelineContext PipelineContext::create(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.provider == "live")
        throw std::runtime_error(
            "live model providers are not bundled in this build; record a fixture archive "
            "with a model-enabled build and set provider to 'fixture:<path>' "
            "(config key 'provider')");
    const std::string path = cfg.provider.substr(std::string("fixture:").size());
    return create_with_providers(cfg, make_fixture_providers(path));
}

PipelineContext PipelineContext::create_with_providers(const PipelineConfig& cfg,
                                                       const ProviderSet& providers) {
    cfg.validate();
    require(!cfg.classes.empty(), "no classes configured (config key 'classes')");

    PipelineContext ctx;
    ctx.cfg_ = cfg;
    ctx.providers_ = providers;
    ctx.expansion_ = expand_class_names(
        cfg.classes,
        cfg.nc ? cfg.plural_map : std::map<std::string, std::vector<std::string>>{},
        cfg.background_subclasses, cfg.background_enabled, cfg.background_name);
    ctx.table_ = embed_classes(*providers.text, ctx.expansion_.specs, cfg.effective_templates());
    // background bookkeeping rides on the table (index in the original space)
    ctx.table_.background_index = ctx.expansion_.background_index;
    ctx.table_.background_subclasses = ctx.expansion_.background_subclasses;
    return ctx;
}

PipelineContext::Output PipelineContext::segment(const ImageU8& image,
                                                 const LabelImage* groundtruth) const {
    SlideResult slide = slide_inference(image, providers_, table_, cfg_, groundtruth);

    Output out;
    out.merged_masks = std::move(slide.merged_masks);
    out.resized = std::move(slide.resized);
    out.plan = std::move(slide.plan);
    out.map = std::move(slide.map);

    if (cfg_.mc && out.merged_masks.region_count() > 0) mode_correct(out.map, out.merged_masks);
    fold_labels(out.map, expansion_);
    return out;
}

}  // namespace corrseg
