from summary_service.renderer import SummaryRenderer
