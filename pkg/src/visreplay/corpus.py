"""The shipped page catalog: five small app families used by the evaluation suite."""

from __future__ import annotations

from .devicefarm.pages import AbstractPage, AbstractWidget, App, WidgetType

W = AbstractWidget
T = WidgetType


def label(wid, text, size=16.0):
    return W(wid, T.LABEL, text=text, size=size)


def title(wid, text):
    return W(wid, T.LABEL, text=text, size=22.0)


def button(wid, text, min_width=0.0):
    return W(wid, T.BUTTON, text=text, min_width=min_width)


def field(wid, hint):
    return W(wid, T.BUTTON, text=hint, editable=True)


def icon(wid, seed):
    return W(wid, T.ICON, glyph_seed=seed)


def image(wid, seed, aspect=0.5625, min_width=0.0, volatile=False):
    return W(wid, T.IMAGE, glyph_seed=seed, aspect=aspect, min_width=min_width, volatile=volatile)


def card(wid, *children):
    return W(wid, T.CONTAINER, children=tuple(children))


def row(wid, *children):
    return W(wid, T.CONTAINER, children=tuple(children), plain=True, direction="row")


def tile(wid, seed, text, min_width=96.0):
    return W(wid, T.GRID_ITEM, min_width=min_width,
             children=(icon(f"{wid}_i", seed), label(f"{wid}_t", text, 14.0)))


def nav(prefix, items):
    return tuple(W(f"{prefix}_{k}", T.ICON, text=text, glyph_seed=seed) for k, (text, seed) in enumerate(items))


SHOP_NAV = (("Home", 101), ("Browse", 102), ("Cart", 103), ("Account", 104))
MAIL_NAV = (("Inbox", 111), ("Starred", 112), ("Sent", 113))
NEWS_NAV = (("Top stories", 121), ("Saved", 122), ("Topics", 123))


def _shop() -> list[AbstractPage]:
    home = AbstractPage(
        "shop_home", family="shop",
        widgets=(
            title("sh_title", "Corner Market"),
            field("sh_search", "Search products"),
            card("sh_cats", label("sh_cats_t", "Shop by category"),
                 tile("sh_c_fruit", 11, "Fruit"), tile("sh_c_bakery", 12, "Bakery"),
                 tile("sh_c_dairy", 13, "Dairy"), tile("sh_c_drinks", 14, "Drinks"),
                 tile("sh_c_snacks", 15, "Snacks"), tile("sh_c_frozen", 16, "Frozen")),
            image("sh_banner", 21, aspect=0.4, volatile=True),
            card("sh_deal", label("sh_deal_t", "Deal of the day"),
                 label("sh_deal_d", "Sourdough loaf, two for one"),
                 button("sh_deal_b", "View deal")),
            card("sh_recent", label("sh_recent_t", "Recently viewed"),
                 row("sh_r1", icon("sh_r1_i", 17), label("sh_r1_l", "Oat milk 1L"),
                     button("sh_r1_b", "Add", 64)),
                 row("sh_r2", icon("sh_r2_i", 18), label("sh_r2_l", "Greek yogurt"),
                     button("sh_r2_b", "Add", 64)),
                 row("sh_r3", icon("sh_r3_i", 19), label("sh_r3_l", "Blueberries"),
                     button("sh_r3_b", "Add", 64))),
            label("sh_footer", "Free delivery over 30 dollars"),
        ),
        nav=nav("sh_nav", SHOP_NAV),
        transitions={("sh_c_fruit", "Click"): "shop_category", ("sh_deal_b", "Click"): "shop_product",
                     ("sh_r1_l", "Click"): "shop_product", ("sh_nav_2", "Click"): "shop_cart",
                     ("sh_nav_3", "Click"): "settings_account", ("sh_c_bakery", "Click"): "shop_category"},
    )
    category = AbstractPage(
        "shop_category", family="shop",
        widgets=(
            row("sc_top", icon("sc_back", 31), title("sc_title", "Fresh fruit")),
            label("sc_sub", "Picked this morning"),
            card("sc_grid", label("sc_grid_t", "All fruit"),
                 *[tile(f"sc_p{k}", 40 + k, name) for k, name in enumerate(
                     ("Apples", "Pears", "Plums", "Cherries", "Lemons", "Limes", "Mangoes", "Kiwis",
                      "Peaches", "Grapes"))]),
            card("sc_tip", label("sc_tip_t", "Storage tip"),
                 label("sc_tip_d", "Keep berries dry and cold")),
            button("sc_more", "Load more"),
        ),
        transitions={("sc_back", "Click"): "shop_home", ("sc_p0", "Click"): "shop_product",
                     ("sc_p7", "Click"): "shop_product"},
    )
    product = AbstractPage(
        "shop_product", family="shop",
        widgets=(
            row("sp_top", icon("sp_back", 31), title("sp_title", "Sourdough loaf")),
            image("sp_photo", 22),
            label("sp_price", "4 dollars 50", 20.0),
            button("sp_add", "Add to cart"),
            card("sp_desc", label("sp_desc_t", "Description"),
                 label("sp_desc_1", "Slow fermented for two days"),
                 label("sp_desc_2", "Baked fresh every morning")),
            card("sp_reviews", label("sp_reviews_t", "Reviews"),
                 row("sp_rv1", icon("sp_rv1_i", 51), label("sp_rv1_l", "Crispy crust, great taste")),
                 row("sp_rv2", icon("sp_rv2_i", 52), label("sp_rv2_l", "Stays soft for days")),
                 row("sp_rv3", icon("sp_rv3_i", 53), label("sp_rv3_l", "A bit too sour for me"))),
            card("sp_related", label("sp_related_t", "You may also like"),
                 tile("sp_rel1", 54, "Rye bread"), tile("sp_rel2", 55, "Bagels"),
                 tile("sp_rel3", 56, "Croissant")),
            button("sp_share", "Share"),
        ),
        transitions={("sp_back", "Click"): "shop_home", ("sp_add", "Click"): "shop_cart"},
    )
    cart = AbstractPage(
        "shop_cart", family="shop",
        widgets=(
            title("ct_title", "Your cart"),
            card("ct_items", label("ct_items_t", "Three items"),
                 row("ct_i1", icon("ct_i1_i", 61), label("ct_i1_l", "Sourdough loaf"),
                     button("ct_i1_d", "Delete", 72)),
                 row("ct_i2", icon("ct_i2_i", 62), label("ct_i2_l", "Oat milk 1L"),
                     button("ct_i2_d", "Delete", 72)),
                 row("ct_i3", icon("ct_i3_i", 63), label("ct_i3_l", "Blueberries"),
                     button("ct_i3_d", "Delete", 72))),
            field("ct_promo", "Promo code"),
            card("ct_sum", label("ct_sum_t", "Order summary"),
                 label("ct_sub", "Subtotal 11 dollars"),
                 label("ct_fee", "Delivery fee 2 dollars"),
                 label("ct_total", "Total 13 dollars", 18.0)),
            button("ct_checkout", "Checkout"),
            button("ct_keep", "Keep shopping"),
        ),
        nav=nav("ct_nav", SHOP_NAV),
        transitions={("ct_checkout", "Click"): "shop_checkout", ("ct_keep", "Click"): "shop_home",
                     ("ct_nav_0", "Click"): "shop_home"},
    )
    checkout = AbstractPage(
        "shop_checkout", family="shop",
        widgets=(
            row("co_top", icon("co_back", 31), title("co_title", "Checkout")),
            card("co_addr", label("co_addr_t", "Delivery address"),
                 field("co_name", "Full name"), field("co_street", "Street and number"),
                 field("co_city", "City")),
            card("co_pay", label("co_pay_t", "Payment"),
                 row("co_card", icon("co_card_i", 71), label("co_card_l", "Card ending 4242")),
                 row("co_cash", icon("co_cash_i", 72), label("co_cash_l", "Cash on delivery"))),
            card("co_when", label("co_when_t", "Delivery time"),
                 button("co_w1", "Today", 96), button("co_w2", "Tomorrow", 96),
                 button("co_w3", "Weekend", 96)),
            button("co_place", "Place order"),
        ),
        transitions={("co_back", "Click"): "shop_cart", ("co_place", "Click"): "shop_done"},
    )
    done = AbstractPage(
        "shop_done", family="shop",
        widgets=(
            icon("dn_icon", 81),
            title("dn_title", "Order placed"),
            label("dn_msg", "Arriving today after 5 pm"),
            card("dn_track", label("dn_track_t", "Track your order"),
                 label("dn_track_d", "Courier updates every hour"),
                 button("dn_track_b", "Open tracking")),
            button("dn_home", "Back to home"),
        ),
        transitions={("dn_home", "Click"): "shop_home"},
    )
    return [home, category, product, cart, checkout, done]


def _travel() -> list[AbstractPage]:
    search = AbstractPage(
        "travel_search", family="travel",
        widgets=(
            title("ts_title", "Find a flight"),
            card("ts_form", label("ts_form_t", "Trip details"),
                 field("ts_from", "From city"), field("ts_to", "To city"),
                 field("ts_date", "Departure date"),
                 button("ts_one", "One way", 120), button("ts_ret", "Round trip", 120)),
            button("ts_go", "Search flights"),
            card("ts_recent", label("ts_recent_t", "Recent searches"),
                 row("ts_rs1", icon("ts_rs1_i", 91), label("ts_rs1_l", "Lisbon to Oslo")),
                 row("ts_rs2", icon("ts_rs2_i", 91), label("ts_rs2_l", "Rome to Vienna")),
                 row("ts_rs3", icon("ts_rs3_i", 91), label("ts_rs3_l", "Paris to Dublin"))),
            image("ts_promo", 23, aspect=0.35),
            card("ts_deals", label("ts_deals_t", "Weekend deals"),
                 tile("ts_d1", 92, "Porto"), tile("ts_d2", 93, "Prague"),
                 tile("ts_d3", 94, "Seville"), tile("ts_d4", 95, "Krakow")),
            button("ts_gallery", "Destination photos"),
        ),
        transitions={("ts_go", "Click"): "travel_results", ("ts_gallery", "Click"): "travel_gallery",
                     ("ts_d2", "Click"): "travel_hotel", ("ts_rs1_l", "Click"): "travel_results"},
    )
    results = AbstractPage(
        "travel_results", family="travel",
        widgets=(
            row("tr_top", icon("tr_back", 31), title("tr_title", "Flights found")),
            label("tr_sub", "Sorted by price"),
            *[card(f"tr_f{k}", label(f"tr_f{k}_t", f"{dep} to {arr}"),
                   row(f"tr_f{k}_r", icon(f"tr_f{k}_i", 96 + k), label(f"tr_f{k}_l", info),
                       button(f"tr_f{k}_b", "Select", 80)))
              for k, (dep, arr, info) in enumerate((
                  ("7:05", "9:40", "Direct, 129 euro"), ("8:15", "12:30", "One stop, 99 euro"),
                  ("11:20", "13:55", "Direct, 149 euro"), ("14:45", "19:10", "One stop, 89 euro"),
                  ("18:30", "21:05", "Direct, 119 euro"), ("21:50", "0:25", "Direct, 79 euro")))],
            button("tr_more", "Show later flights"),
        ),
        transitions={("tr_back", "Click"): "travel_search", ("tr_f0_b", "Click"): "travel_hotel",
                     ("tr_f3_b", "Click"): "travel_hotel", ("tr_f5_b", "Click"): "travel_hotel"},
    )
    gallery = AbstractPage(
        "travel_gallery", family="travel",
        panes=(
            (title("tg_t1", "Harbour views"), image("tg_i1", 24, aspect=0.75),
             label("tg_l1", "Boats at sunrise"), button("tg_b1", "Save photo")),
            (title("tg_t2", "Old town"), image("tg_i2", 25, aspect=0.75),
             label("tg_l2", "Narrow streets at noon"), button("tg_b2", "Save this one")),
            (title("tg_t3", "Mountain pass"), image("tg_i3", 26, aspect=0.75),
             label("tg_l3", "Snow above the clouds"), button("tg_b3", "Save for later")),
            (title("tg_t4", "Night market"), image("tg_i4", 27, aspect=0.75),
             label("tg_l4", "Lanterns and food stalls"), button("tg_b4", "Back to search")),
        ),
        transitions={("tg_b4", "Click"): "travel_search"},
    )
    hotel = AbstractPage(
        "travel_hotel", family="travel",
        widgets=(
            row("th_top", icon("th_back", 31), title("th_title", "Hotel Aurora")),
            image("th_photo", 28),
            label("th_rating", "Rated 4.6 by 812 guests"),
            card("th_rooms", label("th_rooms_t", "Choose a room"),
                 row("th_r1", label("th_r1_l", "Single room 70 euro"), button("th_r1_b", "Book", 72)),
                 row("th_r2", label("th_r2_l", "Double room 95 euro"), button("th_r2_b", "Book", 72)),
                 row("th_r3", label("th_r3_l", "Suite 180 euro"), button("th_r3_b", "Book", 72))),
            card("th_fac", label("th_fac_t", "Facilities"),
                 tile("th_fa1", 131, "Pool"), tile("th_fa2", 132, "Gym"),
                 tile("th_fa3", 133, "Parking"), tile("th_fa4", 134, "Breakfast"),
                 tile("th_fa5", 135, "Spa")),
            card("th_loc", label("th_loc_t", "Location"),
                 image("th_map", 29, aspect=0.5),
                 label("th_loc_d", "Ten minutes from the station")),
            button("th_book", "Book now"),
        ),
        transitions={("th_back", "Click"): "travel_results", ("th_book", "Click"): "travel_confirm",
                     ("th_r2_b", "Click"): "travel_confirm"},
    )
    confirm = AbstractPage(
        "travel_confirm", family="travel",
        widgets=(
            title("tc_title", "Confirm booking"),
            card("tc_sum", label("tc_sum_t", "Your stay"),
                 label("tc_sum_1", "Hotel Aurora, two nights"),
                 label("tc_sum_2", "Double room with breakfast")),
            field("tc_email", "Email for receipt"),
            button("tc_pay", "Pay 190 euro"),
            button("tc_cancel", "Cancel"),
        ),
        transitions={("tc_cancel", "Click"): "travel_hotel", ("tc_pay", "Click"): "travel_search"},
    )
    return [search, results, gallery, hotel, confirm]


def _mail() -> list[AbstractPage]:
    senders = (("Dana Reyes", "Quarterly report draft"), ("Build server", "Nightly build passed"),
               ("Luis Ortega", "Lunch on Friday?"), ("Team calendar", "Standup moved to 10"),
               ("Mia Chen", "Photos from the trip"), ("Billing", "Invoice 2291 is ready"),
               ("Sam Patel", "Re: design review"), ("Newsletter", "Five tips for focus"),
               ("Ola Berg", "Keys are at the desk"))
    inbox = AbstractPage(
        "mail_inbox", family="mail",
        widgets=(
            row("mi_top", title("mi_title", "Inbox"), button("mi_compose", "Compose", 110)),
            field("mi_search", "Search mail"),
            *[card(f"mi_m{k}", label(f"mi_m{k}_s", who),
                   row(f"mi_m{k}_r", icon(f"mi_m{k}_i", 140 + k), label(f"mi_m{k}_l", subject)))
              for k, (who, subject) in enumerate(senders)],
        ),
        nav=nav("mi_nav", MAIL_NAV),
        transitions={("mi_compose", "Click"): "mail_compose", ("mi_m0_s", "Click"): "mail_message",
                     ("mi_m4_s", "Click"): "mail_message", ("mi_m8_s", "Click"): "mail_message",
                     ("mi_nav_2", "Click"): "mail_folders"},
    )
    message = AbstractPage(
        "mail_message", family="mail",
        widgets=(
            row("mm_top", icon("mm_back", 31), title("mm_title", "Message")),
            card("mm_head", label("mm_from", "From Dana Reyes"),
                 label("mm_subj", "Quarterly report draft", 18.0)),
            label("mm_b1", "Hi all, the draft is attached."),
            label("mm_b2", "Please add comments by Monday."),
            label("mm_b3", "Numbers for March are final."),
            image("mm_att", 30, aspect=0.5),
            card("mm_actions", label("mm_actions_t", "Quick replies"),
                 button("mm_q1", "Thanks", 96), button("mm_q2", "Will do", 96),
                 button("mm_q3", "Looks good", 110)),
            button("mm_reply", "Reply"),
            button("mm_forward", "Forward"),
        ),
        transitions={("mm_back", "Click"): "mail_inbox", ("mm_reply", "Click"): "mail_compose"},
    )
    compose = AbstractPage(
        "mail_compose", family="mail",
        widgets=(
            row("mc_top", icon("mc_back", 31), title("mc_title", "New message")),
            field("mc_to", "Recipient"),
            field("mc_subject", "Subject"),
            field("mc_body", "Write your message"),
            card("mc_attach", label("mc_attach_t", "Attach"),
                 tile("mc_a1", 151, "Photo"), tile("mc_a2", 152, "File"),
                 tile("mc_a3", 153, "Location")),
            button("mc_send", "Send"),
            button("mc_discard", "Discard draft"),
        ),
        transitions={("mc_back", "Click"): "mail_inbox", ("mc_send", "Click"): "mail_inbox",
                     ("mc_discard", "Click"): "mail_inbox"},
    )
    folders = AbstractPage(
        "mail_folders", family="mail",
        widgets=(
            title("mf_title", "Folders"),
            card("mf_grid", label("mf_grid_t", "Your folders"),
                 *[tile(f"mf_f{k}", 160 + k, name) for k, name in enumerate(
                     ("Work", "Family", "Receipts", "Travel", "Archive", "Spam", "Drafts", "Trash"))]),
            card("mf_storage", label("mf_storage_t", "Storage"),
                 label("mf_storage_d", "Using 3.2 of 15 GB"),
                 button("mf_clean", "Free up space")),
        ),
        nav=nav("mf_nav", MAIL_NAV),
        transitions={("mf_nav_0", "Click"): "mail_inbox", ("mf_f0", "Click"): "mail_inbox"},
    )
    return [inbox, message, compose, folders]


def _settings() -> list[AbstractPage]:
    def setting_row(wid, seed, text):
        return row(wid, icon(f"{wid}_i", seed), label(f"{wid}_l", text), icon(f"{wid}_go", 170))

    main = AbstractPage(
        "settings_main", family="settings",
        widgets=(
            title("st_title", "Settings"),
            field("st_search", "Search settings"),
            card("st_net", label("st_net_t", "Connections"),
                 setting_row("st_wifi", 171, "Wi-Fi"), setting_row("st_bt", 172, "Bluetooth"),
                 setting_row("st_data", 173, "Mobile data")),
            card("st_dev", label("st_dev_t", "Device"),
                 setting_row("st_disp", 174, "Display"), setting_row("st_sound", 175, "Sound"),
                 setting_row("st_batt", 176, "Battery"), setting_row("st_store", 177, "Storage")),
            card("st_you", label("st_you_t", "Personal"),
                 setting_row("st_acc", 178, "Accounts"), setting_row("st_notif", 179, "Notifications"),
                 setting_row("st_priv", 180, "Privacy")),
            card("st_sys", label("st_sys_t", "System"),
                 setting_row("st_lang", 181, "Languages"), setting_row("st_about", 182, "About phone")),
        ),
        transitions={("st_disp_l", "Click"): "settings_display", ("st_acc_l", "Click"): "settings_account",
                     ("st_notif_l", "Click"): "settings_notifications",
                     ("st_about_l", "Click"): "settings_about", ("st_about_go", "Click"): "settings_about"},
    )
    display = AbstractPage(
        "settings_display", family="settings",
        widgets=(
            row("sd_top", icon("sd_back", 31), title("sd_title", "Display")),
            card("sd_bright", label("sd_bright_t", "Brightness"),
                 button("sd_low", "Low", 80), button("sd_mid", "Medium", 80), button("sd_high", "High", 80)),
            card("sd_theme", label("sd_theme_t", "Theme"),
                 tile("sd_light", 183, "Light"), tile("sd_dark", 184, "Dark"), tile("sd_auto", 185, "Auto")),
            card("sd_font", label("sd_font_t", "Font size"),
                 label("sd_font_d", "Preview of the current size")),
            image("sd_wall", 31, aspect=0.6),
            button("sd_wall_b", "Change wallpaper"),
        ),
        transitions={("sd_back", "Click"): "settings_main"},
    )
    account = AbstractPage(
        "settings_account", family="settings",
        widgets=(
            row("sa_top", icon("sa_back", 31), title("sa_title", "Account")),
            icon("sa_avatar", 186),
            label("sa_name", "Alex Morgan", 20.0),
            field("sa_email", "Email address"),
            field("sa_phone", "Phone number"),
            button("sa_save", "Save changes"),
            card("sa_sec", label("sa_sec_t", "Security"),
                 setting_row("sa_pw", 187, "Change password"),
                 setting_row("sa_2fa", 188, "Two-step sign in")),
            button("sa_logout", "Sign out"),
        ),
        transitions={("sa_back", "Click"): "settings_main", ("sa_save", "Click"): "settings_main"},
    )
    notifications = AbstractPage(
        "settings_notifications", family="settings",
        widgets=(
            row("sn_top", icon("sn_back", 31), title("sn_title", "Notifications")),
            *[card(f"sn_c{k}", label(f"sn_c{k}_t", name),
                   row(f"sn_c{k}_r", label(f"sn_c{k}_l", desc), button(f"sn_c{k}_b", "Off", 64)))
              for k, (name, desc) in enumerate((
                  ("Messages", "Alerts for new messages"), ("Calendar", "Reminders before events"),
                  ("Shopping", "Order and delivery news"), ("Travel", "Gate and delay alerts"),
                  ("News", "Breaking stories only"), ("System", "Updates and security")))],
        ),
        transitions={("sn_back", "Click"): "settings_main"},
    )
    about = AbstractPage(
        "settings_about", family="settings",
        widgets=(
            row("ab_top", icon("ab_back", 31), title("ab_title", "About phone")),
            card("ab_info", label("ab_info_t", "Device info"),
                 label("ab_model", "Model TX-200"), label("ab_serial", "Serial 88-1042-77"),
                 label("ab_build", "Build 12.4.1")),
            card("ab_legal", label("ab_legal_t", "Legal"),
                 label("ab_legal_1", "Open source licences"), label("ab_legal_2", "Terms of service"),
                 label("ab_legal_3", "Privacy notice")),
            button("ab_update", "Check for updates"),
        ),
        transitions={("ab_back", "Click"): "settings_main"},
    )
    return [main, display, account, notifications, about]


def _news() -> list[AbstractPage]:
    stories = (("City opens new river park", 32), ("Rail line adds night trains", 33),
               ("Local team wins the cup", 34), ("Museum extends hours", 35),
               ("Rain expected all weekend", 36))
    feed = AbstractPage(
        "news_feed", family="news",
        widgets=(
            title("nf_title", "Morning brief"),
            *[card(f"nf_s{k}", label(f"nf_s{k}_t", headline), image(f"nf_s{k}_i", seed, aspect=0.45),
                   row(f"nf_s{k}_r", label(f"nf_s{k}_m", f"{3 + k} min read"), button(f"nf_s{k}_b", "Save", 72)))
              for k, (headline, seed) in enumerate(stories)],
        ),
        nav=nav("nf_nav", NEWS_NAV),
        transitions={("nf_s0_t", "Click"): "news_article", ("nf_s2_t", "Click"): "news_article",
                     ("nf_nav_2", "Click"): "news_topics"},
    )
    article = AbstractPage(
        "news_article", family="news",
        widgets=(
            row("na_top", icon("na_back", 31), title("na_title", "River park")),
            image("na_photo", 32, aspect=0.5),
            label("na_p1", "The park opens on Saturday."),
            label("na_p2", "It covers two kilometres of bank."),
            label("na_p3", "Bikes can be rented at the gate."),
            card("na_more", label("na_more_t", "Related stories"),
                 label("na_more_1", "Bridge repairs finish early"),
                 label("na_more_2", "New ferry stop planned")),
            button("na_share", "Share story"),
        ),
        transitions={("na_back", "Click"): "news_feed"},
    )
    topics = AbstractPage(
        "news_topics", family="news",
        widgets=(
            title("nt_title", "Topics"),
            card("nt_grid", label("nt_grid_t", "Follow topics"),
                 *[tile(f"nt_t{k}", 190 + k, name) for k, name in enumerate(
                     ("Science", "Sport", "Culture", "Business", "Health", "Weather", "Travel", "Food",
                      "Tech"))]),
            button("nt_done", "Done"),
        ),
        nav=nav("nt_nav", NEWS_NAV),
        transitions={("nt_nav_0", "Click"): "news_feed", ("nt_done", "Click"): "news_feed"},
    )
    intro = AbstractPage(
        "news_intro", family="news",
        panes=(
            (title("ni_t1", "Welcome"), icon("ni_i1", 195), label("ni_l1", "Stories picked for you"),
             image("ni_p1", 37, aspect=0.6)),
            (title("ni_t2", "Save for later"), icon("ni_i2", 196), label("ni_l2", "Read offline any time"),
             image("ni_p2", 38, aspect=0.6)),
            (title("ni_t3", "Stay informed"), icon("ni_i3", 197), label("ni_l3", "Alerts only when it matters"),
             button("ni_start", "Get started")),
        ),
        transitions={("ni_start", "Click"): "news_feed"},
    )
    return [feed, article, topics, intro]


def build_catalog() -> App:
    """All shipped pages as one app; families link to each other only via the account page."""
    pages = _shop() + _travel() + _mail() + _settings() + _news()
    return App(pages, start="shop_home")
