package com.example.billing;

import java.util.List;

 
public class BillingService {

    private final List<Invoice> invoices;

     
    public BillingService(List<Invoice> invoices) {
        this.invoices = invoices;
    }

     
    public long totalOpenCents() {
        long total = 0;  
        for (Invoice inv : invoices) {
            if (!inv.isPaid()) {
                total += inv.amountCents();
            }
        }
        return total;
    }

     
    void settleAll() {
        String note = "paid /* keep */";
        for (Invoice inv : invoices) {
            inv.markPaid(note);
        }
    }
}
