"""The shipped replay suite: twenty scripted test cases over the page catalog."""

from __future__ import annotations

from .replay import ScriptStep, TestCase


def click(widget: str) -> ScriptStep:
    return ScriptStep("Click", widget)


def long_press(widget: str, ms: int = 800) -> ScriptStep:
    return ScriptStep("LongPress", widget, duration_ms=ms)


def type_in(widget: str, text: str) -> ScriptStep:
    return ScriptStep("Input", widget, text=text)


def scroll(screens: float) -> ScriptStep:
    return ScriptStep("ScrollV", screens=screens)


def swipe(screens: float = 0.75) -> ScriptStep:
    return ScriptStep("SwipeH", screens=screens)


def _case(name, source, start, *steps) -> TestCase:
    return TestCase(name, source, start, tuple(steps))


def build_suite() -> list[TestCase]:
    return [
        _case("shop_deal_to_checkout", "D1", "shop_home",
              click("sh_deal_b"), click("sp_add"), type_in("ct_promo", "SPRING10"),
              click("ct_checkout"), type_in("co_name", "Ana Silva"), click("co_place"),
              click("dn_home")),
        _case("shop_recent_add", "D1", "shop_home",
              click("sh_r2_b"), click("sh_r1_l"), scroll(0.5), click("sp_rel2"), click("sp_share")),
        _case("travel_book_hotel", "D3", "travel_search",
              type_in("ts_from", "Lisbon"), type_in("ts_to", "Oslo"), click("ts_ret"),
              click("ts_go"), click("tr_f3_b"), click("th_r2_b"),
              type_in("tc_email", "ana@example.com"), click("tc_pay")),
        _case("travel_gallery_swipe", "D1", "travel_search",
              scroll(0.7), click("ts_gallery"), swipe(), swipe(), swipe(), click("tg_b4")),
        _case("mail_reply", "D4", "mail_inbox",
              click("mi_m4_s"), click("mm_reply"), type_in("mc_subject", "Re: photos"),
              type_in("mc_body", "Lovely, thanks"), click("mc_send")),
        _case("mail_folders", "D5", "mail_inbox",
              scroll(0.8), scroll(0.8), click("mi_nav_2~label"), click("mf_f2"), click("mf_f5")),
        _case("settings_about", "D5", "settings_main",
              scroll(0.9), click("st_about_l"), click("ab_update"), long_press("ab_legal_1"),
              click("ab_back")),
        _case("settings_notifications", "D1", "settings_main",
              click("st_notif_l"), click("sn_c3_b"), click("sn_c1_b"), long_press("sn_c4_l"),
              click("sn_back")),
        _case("settings_account_edit", "D3", "settings_main",
              click("st_acc_l"), type_in("sa_email", "alex@example.com"), type_in("sa_phone", "555 0101"),
              click("sa_save"), click("st_disp_l")),
        _case("news_intro_flow", "D4", "news_intro",
              swipe(), swipe(), click("ni_start"), scroll(0.6), click("nf_s2_t"), click("na_share")),
        _case("news_topics_done", "D1", "news_topics",
              click("nt_t3"), click("nt_t8"), click("nt_done"), click("nf_s0_b"), click("nf_s0_t")),
        _case("shop_category_grid", "D5", "shop_home",
              click("sh_c_fruit"), scroll(0.8), click("sc_p9_t"), click("sc_more"), scroll(-0.8), click("sc_back")),
        _case("cart_delete", "D4", "shop_cart",
              click("ct_i2_d"), click("ct_i3_d"), type_in("ct_promo", "SAVE5"), click("ct_keep"),
              type_in("sh_search", "bread")),
        _case("checkout_payment", "D1", "shop_checkout",
              type_in("co_name", "Ana Silva"), type_in("co_street", "12 Harbour Road"),
              type_in("co_city", "Porto"), click("co_cash_l"), click("co_w2"), click("co_place"),
              click("dn_track_b")),
        _case("hotel_facilities", "D1", "travel_hotel",
              click("th_fa3"), scroll(0.6), click("th_loc_d"), scroll(-0.6), click("th_back")),
        _case("results_select", "D5", "travel_results",
              scroll(0.8), click("tr_f5_b"), click("th_r1_b"), long_press("th_rating"), click("th_back")),
        _case("feed_scroll_save", "D5", "news_feed",
              scroll(0.9), scroll(0.9), click("nf_s4_b"), click("nf_s4_t"), scroll(-0.9),
              click("nf_s3_t")),
        _case("done_tracking", "D3", "shop_done",
              click("dn_track_b"), click("dn_home"), click("sh_c_bakery"), click("sc_p7"),
              click("sp_add")),
        _case("message_quick_reply", "D1", "mail_message",
              click("mm_q3"), click("mm_forward"), click("mm_back"), click("mi_compose"),
              type_in("mc_to", "dana@example.com"), click("mc_discard")),
        _case("display_theme", "D4", "settings_display",
              click("sd_dark"), click("sd_high"), click("sd_wall_b"), click("sd_back")),
    ]
